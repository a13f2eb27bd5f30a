// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "splatseg/types.hpp"

namespace splatseg::testing {

// Camera at the origin looking down +z, principal point centered.
inline CameraView make_camera(int w, int h, float fx, int timestamp = 0) {
  CameraView cam;
  cam.width = w;
  cam.height = h;
  cam.fx = fx;
  cam.fy = fx;
  cam.cx = 0.5f * static_cast<float>(w);
  cam.cy = 0.5f * static_cast<float>(h);
  cam.timestamp = timestamp;
  return cam;
}

inline GaussianFrameParams isotropic(
    const Eigen::Vector3f& mean, float sigma, float opacity,
    const Eigen::Vector3f& color = Eigen::Vector3f(0.5f, 0.5f, 0.5f)) {
  GaussianFrameParams p;
  p.mean = mean;
  p.scale = Eigen::Vector3f::Constant(sigma);
  p.opacity = opacity;
  p.color = color;
  return p;
}

inline InstanceMask flat_mask(int w, int h, std::uint16_t label,
                              int timestamp = 0) {
  InstanceMask m;
  m.labels = Image<std::uint16_t>(w, h, 1, label);
  m.timestamp = timestamp;
  return m;
}

// Pixels with x < split get `left`, the rest `right`.
inline InstanceMask split_mask(int w, int h, int split, std::uint16_t left,
                               std::uint16_t right, int timestamp = 0) {
  InstanceMask m;
  m.labels = Image<std::uint16_t>(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      m.labels.at(x, y) = x < split ? left : right;
  m.timestamp = timestamp;
  return m;
}

}  // namespace splatseg::testing

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "splatseg/image.hpp"

namespace splatseg {

// Malformed bytes on disk (bad magic, truncated payload, wrong maxval, ...).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed bytes carrying invalid values (non-finite, out of range, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Explicit per-frame Gaussian parameters. Scales are standard deviations
// along the local axes; rotation is a unit quaternion; color is linear RGB.
struct GaussianFrameParams {
  Eigen::Vector3f mean = Eigen::Vector3f::Zero();
  Eigen::Quaternionf rotation = Eigen::Quaternionf::Identity();
  Eigen::Vector3f scale = Eigen::Vector3f::Ones();
  float opacity = 1.0f;
  Eigen::Vector3f color = Eigen::Vector3f::Constant(0.5f);
};

// N Gaussians with independent parameters per timestamp, stored frame-major
// so a whole frame is contiguous.
class DynamicScene {
 public:
  DynamicScene() = default;
  DynamicScene(int gaussian_count, int timestamp_count);

  int gaussian_count() const { return gaussians_; }
  int timestamp_count() const { return timestamps_; }

  std::span<const GaussianFrameParams> frame(int t) const;
  std::span<GaussianFrameParams> frame(int t);

  GaussianFrameParams& at(int gaussian, int t);
  const GaussianFrameParams& at(int gaussian, int t) const;

  // Throws ValidationError naming the offending (gaussian, timestamp).
  void validate() const;

 private:
  int gaussians_ = 0;
  int timestamps_ = 0;
  std::vector<GaussianFrameParams> params_;
};

// Pinhole camera with a rigid world-to-camera transform; +z looks forward.
struct CameraView {
  float fx = 1.0f, fy = 1.0f;
  float cx = 0.0f, cy = 0.0f;
  int width = 0, height = 0;
  Eigen::Matrix4f world_to_camera = Eigen::Matrix4f::Identity();
  int timestamp = 0;

  void validate() const;
};

// Per-pixel instance labels for one view. Label 0 is background.
struct InstanceMask {
  Image<std::uint16_t> labels;
  int timestamp = 0;

  std::uint16_t max_label() const;
};

// Largest instance id over a mask set (K). Column count downstream is K+1.
int max_label(std::span<const InstanceMask> masks);

// Checks that the requested instance id labels at least one pixel.
void validate_target(int target_id, std::span<const InstanceMask> masks);

}  // namespace splatseg

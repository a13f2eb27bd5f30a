// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <optional>
#include <vector>

#include "splatseg/types.hpp"

namespace splatseg {

// Camera-space points closer than this are culled.
inline constexpr float kNearPlane = 0.01f;
// Low-pass term added to the projected covariance diagonal.
inline constexpr float kCovarianceDilation = 0.3f;
// Footprint cutoff in Mahalanobis sigmas; contributions beyond it are zero.
inline constexpr float kFootprintSigmas = 3.0f;
// exp(-power) with power above this is outside the footprint (sigma^2 / 2).
inline constexpr float kMaxKernelPower =
    0.5f * kFootprintSigmas * kFootprintSigmas;

struct Projected2D {
  Eigen::Vector2f mean2d = Eigen::Vector2f::Zero();
  Eigen::Matrix2f cov2d = Eigen::Matrix2f::Identity();
  Eigen::Matrix2f conic = Eigen::Matrix2f::Identity();
  float depth = 0.0f;
  float footprint_radius = 0.0f;
  int source_index = 0;
};

// Sigma = R diag(s)^2 R^T.
template <class Scalar>
Eigen::Matrix<Scalar, 3, 3> covariance_from(
    const Eigen::Quaternion<Scalar>& rotation,
    const Eigen::Matrix<Scalar, 3, 1>& scale) {
  Eigen::Matrix<Scalar, 3, 3> m =
      rotation.normalized().toRotationMatrix() * scale.asDiagonal();
  return m * m.transpose();
}

// Perspective projection of one Gaussian. Returns nullopt when culled
// (behind the near plane or footprint entirely off-screen).
std::optional<Projected2D> project(const GaussianFrameParams& params,
                                   const CameraView& camera, int source_index);

// Unit-peak kernel exp(-0.5 d^T conic d) at a pixel sample point.
float kernel_value(const Projected2D& projected, const Eigen::Vector2f& pixel);

// Ascending depth; ties broken by source_index ascending.
void depth_sort(std::vector<Projected2D>& projected);

}  // namespace splatseg

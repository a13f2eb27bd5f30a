// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/projection.hpp"

#include <algorithm>
#include <cmath>

namespace splatseg {

std::optional<Projected2D> project(const GaussianFrameParams& params,
                                   const CameraView& camera,
                                   int source_index) {
  const Eigen::Matrix3f rot = camera.world_to_camera.topLeftCorner<3, 3>();
  const Eigen::Vector3f trans = camera.world_to_camera.topRightCorner<3, 1>();
  const Eigen::Vector3f p_cam = rot * params.mean + trans;
  const float z = p_cam.z();
  if (z <= kNearPlane) return std::nullopt;

  const float inv_z = 1.0f / z;
  Projected2D out;
  out.source_index = source_index;
  out.depth = z;
  out.mean2d = {camera.fx * p_cam.x() * inv_z + camera.cx,
                camera.fy * p_cam.y() * inv_z + camera.cy};

  // Affine approximation of the perspective map at the mean.
  Eigen::Matrix<float, 2, 3> jac;
  jac << camera.fx * inv_z, 0.0f, -camera.fx * p_cam.x() * inv_z * inv_z,
      0.0f, camera.fy * inv_z, -camera.fy * p_cam.y() * inv_z * inv_z;

  const Eigen::Matrix3f cov3d =
      covariance_from<float>(params.rotation, params.scale);
  Eigen::Matrix2f cov2d =
      jac * rot * cov3d * rot.transpose() * jac.transpose();
  cov2d(0, 0) += kCovarianceDilation;
  cov2d(1, 1) += kCovarianceDilation;
  out.cov2d = cov2d;

  const float det =
      cov2d(0, 0) * cov2d(1, 1) - cov2d(0, 1) * cov2d(1, 0);
  // The dilation keeps cov2d positive definite; a non-positive determinant
  // means the inputs were degenerate beyond repair.
  if (!(det > 0.0f) || !std::isfinite(det)) return std::nullopt;
  const float inv_det = 1.0f / det;
  out.conic << cov2d(1, 1) * inv_det, -cov2d(0, 1) * inv_det,
      -cov2d(1, 0) * inv_det, cov2d(0, 0) * inv_det;

  const float mid = 0.5f * (cov2d(0, 0) + cov2d(1, 1));
  const float disc = std::sqrt(
      std::max(0.0f, mid * mid - det));
  const float lambda_max = mid + disc;
  out.footprint_radius = kFootprintSigmas * std::sqrt(lambda_max);

  if (out.mean2d.x() + out.footprint_radius < 0.0f ||
      out.mean2d.x() - out.footprint_radius >
          static_cast<float>(camera.width) ||
      out.mean2d.y() + out.footprint_radius < 0.0f ||
      out.mean2d.y() - out.footprint_radius >
          static_cast<float>(camera.height))
    return std::nullopt;

  return out;
}

float kernel_value(const Projected2D& projected,
                   const Eigen::Vector2f& pixel) {
  const float dx = pixel.x() - projected.mean2d.x();
  const float dy = pixel.y() - projected.mean2d.y();
  const float power =
      0.5f * (projected.conic(0, 0) * dx * dx +
              projected.conic(1, 1) * dy * dy) +
      projected.conic(0, 1) * dx * dy;
  if (power < 0.0f) return 1.0f;  // numerical guard; the mean is the peak
  return std::exp(-power);
}

void depth_sort(std::vector<Projected2D>& projected) {
  std::stable_sort(projected.begin(), projected.end(),
                   [](const Projected2D& a, const Projected2D& b) {
                     if (a.depth != b.depth) return a.depth < b.depth;
                     return a.source_index < b.source_index;
                   });
}

}  // namespace splatseg

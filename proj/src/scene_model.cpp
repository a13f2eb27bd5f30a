// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>

#include "splatseg/types.hpp"

namespace splatseg {

namespace {

std::string at_location(int gaussian, int t, const char* what) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "gaussian %d at timestamp %d: %s", gaussian,
                t, what);
  return buf;
}

bool finite3(const Eigen::Vector3f& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

}  // namespace

DynamicScene::DynamicScene(int gaussian_count, int timestamp_count)
    : gaussians_(gaussian_count), timestamps_(timestamp_count) {
  if (gaussian_count < 0 || timestamp_count <= 0)
    throw ValidationError("scene dimensions must be positive");
  params_.resize(static_cast<std::size_t>(gaussians_) * timestamps_);
}

std::span<const GaussianFrameParams> DynamicScene::frame(int t) const {
  return {params_.data() + static_cast<std::size_t>(t) * gaussians_,
          static_cast<std::size_t>(gaussians_)};
}

std::span<GaussianFrameParams> DynamicScene::frame(int t) {
  return {params_.data() + static_cast<std::size_t>(t) * gaussians_,
          static_cast<std::size_t>(gaussians_)};
}

GaussianFrameParams& DynamicScene::at(int gaussian, int t) {
  return params_[static_cast<std::size_t>(t) * gaussians_ + gaussian];
}

const GaussianFrameParams& DynamicScene::at(int gaussian, int t) const {
  return params_[static_cast<std::size_t>(t) * gaussians_ + gaussian];
}

void DynamicScene::validate() const {
  constexpr float kUnitTol = 1e-5f;
  for (int t = 0; t < timestamps_; ++t) {
    const auto fr = frame(t);
    for (int i = 0; i < gaussians_; ++i) {
      const GaussianFrameParams& p = fr[i];
      if (!finite3(p.mean))
        throw ValidationError(at_location(i, t, "non-finite mean"));
      if (!std::isfinite(p.rotation.w()) || !std::isfinite(p.rotation.x()) ||
          !std::isfinite(p.rotation.y()) || !std::isfinite(p.rotation.z()))
        throw ValidationError(at_location(i, t, "non-finite rotation"));
      if (std::abs(p.rotation.norm() - 1.0f) > kUnitTol)
        throw ValidationError(at_location(i, t, "rotation is not unit-norm"));
      if (!finite3(p.scale))
        throw ValidationError(at_location(i, t, "non-finite scale"));
      if (p.scale.x() <= 0.0f || p.scale.y() <= 0.0f || p.scale.z() <= 0.0f)
        throw ValidationError(at_location(i, t, "scale must be positive"));
      if (!std::isfinite(p.opacity) || p.opacity < 0.0f || p.opacity > 1.0f)
        throw ValidationError(at_location(i, t, "opacity outside [0,1]"));
      if (!finite3(p.color) || p.color.minCoeff() < 0.0f ||
          p.color.maxCoeff() > 1.0f)
        throw ValidationError(at_location(i, t, "color outside [0,1]"));
    }
  }
}

void CameraView::validate() const {
  if (width <= 0 || height <= 0)
    throw ValidationError("camera image size must be positive");
  if (!(fx > 0.0f) || !(fy > 0.0f))
    throw ValidationError("camera focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw ValidationError("camera principal point is non-finite");
  if (!world_to_camera.allFinite())
    throw ValidationError("world_to_camera is non-finite");
  const Eigen::Matrix3f r = world_to_camera.topLeftCorner<3, 3>();
  if ((r * r.transpose() - Eigen::Matrix3f::Identity()).cwiseAbs().maxCoeff() >
      1e-4f)
    throw ValidationError("world_to_camera rotation is not orthonormal");
  const Eigen::RowVector4f bottom = world_to_camera.row(3);
  if ((bottom - Eigen::RowVector4f(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-6f)
    throw ValidationError("world_to_camera is not a rigid transform");
  if (timestamp < 0) throw ValidationError("camera timestamp is negative");
}

std::uint16_t InstanceMask::max_label() const {
  std::uint16_t m = 0;
  for (std::uint16_t v : labels.data) m = std::max(m, v);
  return m;
}

int max_label(std::span<const InstanceMask> masks) {
  int k = 0;
  for (const InstanceMask& m : masks) k = std::max<int>(k, m.max_label());
  return k;
}

void validate_target(int target_id, std::span<const InstanceMask> masks) {
  if (target_id <= 0)
    throw ValidationError("target instance id must be positive");
  for (const InstanceMask& m : masks)
    for (std::uint16_t v : m.labels.data)
      if (v == target_id) return;
  throw ValidationError("target instance id " + std::to_string(target_id) +
                        " labels no pixel in any mask");
}

}  // namespace splatseg

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splatseg/parallel.hpp"
#include "splatseg/projection.hpp"

namespace splatseg {

void TraceConfig::validate(int gaussian_count) const {
  if (!(alpha_cutoff > 0.0f) || alpha_cutoff >= 1.0f)
    throw ValidationError("alpha_cutoff must lie in (0,1)");
  if (!(transmittance_floor > 0.0f) || transmittance_floor >= 1.0f)
    throw ValidationError("transmittance_floor must lie in (0,1)");
  if (subset_mask != nullptr &&
      static_cast<int>(subset_mask->size()) != gaussian_count)
    throw ValidationError("subset mask size does not match gaussian count");
  if (range_thresholds != nullptr) {
    if (static_cast<int>(range_thresholds->size()) != gaussian_count)
      throw ValidationError(
          "range thresholds size does not match gaussian count");
    for (float r : *range_thresholds)
      if (!std::isfinite(r) || r < 0.0f || r > 1.0f)
        throw ValidationError("range thresholds must lie in [0,1]");
  }
}

void WeightMatrix::add(std::size_t gaussian, std::uint16_t label,
                       double weight) {
  Row& r = rows_[gaussian];
  auto it = std::lower_bound(
      r.begin(), r.end(), label,
      [](const std::pair<std::uint16_t, double>& e, std::uint16_t l) {
        return e.first < l;
      });
  if (it != r.end() && it->first == label) {
    it->second += weight;
  } else {
    r.insert(it, {label, weight});
  }
}

double WeightMatrix::value(std::size_t gaussian, std::uint16_t label) const {
  for (const auto& [l, w] : rows_[gaussian])
    if (l == label) return w;
  return 0.0;
}

double WeightMatrix::row_sum(std::size_t gaussian) const {
  double s = 0.0;
  for (const auto& [l, w] : rows_[gaussian]) s += w;
  return s;
}

double WeightMatrix::max_value() const {
  double m = 0.0;
  for (const Row& r : rows_)
    for (const auto& [l, w] : r) m = std::max(m, w);
  return m;
}

WeightMatrix& WeightMatrix::operator+=(const WeightMatrix& other) {
  if (rows() != other.rows() || cols() != other.cols())
    throw ValidationError("weight matrix shape mismatch");
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& [l, w] : other.rows_[i]) add(i, l, w);
  return *this;
}

namespace {

struct PreparedView {
  std::vector<Projected2D> projected;  // visible, depth-sorted
  std::vector<float> opacity;          // aligned with projected
  std::vector<Eigen::Vector3f> color;  // aligned with projected
};

PreparedView prepare_view(const DynamicScene& scene, const CameraView& camera,
                          const TraceConfig& cfg) {
  camera.validate();
  cfg.validate(scene.gaussian_count());
  if (camera.timestamp >= scene.timestamp_count())
    throw ValidationError("camera timestamp " +
                          std::to_string(camera.timestamp) +
                          " outside scene with " +
                          std::to_string(scene.timestamp_count()) + " frames");
  const auto frame = scene.frame(camera.timestamp);

  PreparedView view;
  view.projected.reserve(frame.size());
  for (int i = 0; i < static_cast<int>(frame.size()); ++i) {
    if (cfg.subset_mask != nullptr && !(*cfg.subset_mask)[i]) continue;
    // r = 0 can never pass g > 1 - r; skip the projection outright.
    if (cfg.range_thresholds != nullptr &&
        (*cfg.range_thresholds)[i] <= 0.0f)
      continue;
    if (auto p = project(frame[i], camera, i)) view.projected.push_back(*p);
  }
  depth_sort(view.projected);
  view.opacity.resize(view.projected.size());
  view.color.resize(view.projected.size());
  for (std::size_t j = 0; j < view.projected.size(); ++j) {
    const GaussianFrameParams& p = frame[view.projected[j].source_index];
    view.opacity[j] = p.opacity;
    view.color[j] = p.color;
  }
  return view;
}

// Shared contribution rule for every rasterization path. Returns the
// clamped alpha, or -1 when the contribution is dropped (outside the
// footprint, below the kernel cutoff, or outside the rendering range).
inline float contribution_alpha(const Projected2D& p, float opacity, float px,
                                float py, const TraceConfig& cfg) {
  const float dx = px - p.mean2d.x();
  const float dy = py - p.mean2d.y();
  const float power =
      0.5f * (p.conic(0, 0) * dx * dx + p.conic(1, 1) * dy * dy) +
      p.conic(0, 1) * dx * dy;
  if (power > kMaxKernelPower) return -1.0f;
  const float g = power <= 0.0f ? 1.0f : std::exp(-power);
  if (g <= cfg.alpha_cutoff) return -1.0f;
  if (cfg.range_thresholds != nullptr &&
      g <= 1.0f - (*cfg.range_thresholds)[p.source_index])
    return -1.0f;
  const float alpha = std::min(kMaxContributionAlpha, opacity * g);
  return alpha > 0.0f ? alpha : -1.0f;
}

struct TileGrid {
  int tiles_x = 0;
  int tiles_y = 0;
  // Per tile: indices into PreparedView::projected, in depth order.
  std::vector<std::vector<std::uint32_t>> lists;
};

TileGrid bin_tiles(const PreparedView& view, int width, int height) {
  TileGrid grid;
  grid.tiles_x = (width + kTileSize - 1) / kTileSize;
  grid.tiles_y = (height + kTileSize - 1) / kTileSize;
  grid.lists.resize(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);
  for (std::uint32_t j = 0; j < view.projected.size(); ++j) {
    const Projected2D& p = view.projected[j];
    // Pixel centers sit at half-integers; pad the bound by the half pixel.
    const int px0 = std::max(
        0, static_cast<int>(
               std::floor(p.mean2d.x() - p.footprint_radius - 0.5f)));
    const int px1 = std::min(
        width - 1,
        static_cast<int>(std::ceil(p.mean2d.x() + p.footprint_radius)));
    const int py0 = std::max(
        0, static_cast<int>(
               std::floor(p.mean2d.y() - p.footprint_radius - 0.5f)));
    const int py1 = std::min(
        height - 1,
        static_cast<int>(std::ceil(p.mean2d.y() + p.footprint_radius)));
    if (px0 > px1 || py0 > py1) continue;
    for (int ty = py0 / kTileSize; ty <= py1 / kTileSize; ++ty)
      for (int tx = px0 / kTileSize; tx <= px1 / kTileSize; ++tx)
        grid.lists[static_cast<std::size_t>(ty) * grid.tiles_x + tx]
            .push_back(j);
  }
  return grid;
}

void check_mask(const InstanceMask& mask, const CameraView& camera,
                int label_count) {
  if (mask.labels.width != camera.width ||
      mask.labels.height != camera.height)
    throw ValidationError("mask dimensions do not match the camera");
  if (mask.labels.channels != 1)
    throw ValidationError("mask must be single-channel");
  if (mask.timestamp != camera.timestamp)
    throw ValidationError("mask timestamp does not match the camera");
  if (static_cast<int>(mask.max_label()) >= label_count)
    throw ValidationError("mask label exceeds label count");
}

}  // namespace

WeightMatrix trace_view(const DynamicScene& scene, const CameraView& camera,
                        const InstanceMask& mask, int label_count,
                        const TraceConfig& cfg) {
  if (label_count < 1) throw ValidationError("label count must be positive");
  check_mask(mask, camera, label_count);
  const PreparedView view = prepare_view(scene, camera, cfg);
  const TileGrid grid = bin_tiles(view, camera.width, camera.height);
  const std::size_t L = static_cast<std::size_t>(label_count);

  // Per-tile dense partials (list position x label), merged in tile order
  // afterwards so the result is independent of the thread count.
  std::vector<std::vector<double>> partials(grid.lists.size());
  parallel_for(grid.lists.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t tile = begin; tile < end; ++tile) {
      const auto& list = grid.lists[tile];
      if (list.empty()) continue;
      std::vector<double>& acc = partials[tile];
      acc.assign(list.size() * L, 0.0);
      const int tx = static_cast<int>(tile) % grid.tiles_x;
      const int ty = static_cast<int>(tile) / grid.tiles_x;
      const int x_end = std::min(camera.width, (tx + 1) * kTileSize);
      const int y_end = std::min(camera.height, (ty + 1) * kTileSize);
      for (int y = ty * kTileSize; y < y_end; ++y) {
        for (int x = tx * kTileSize; x < x_end; ++x) {
          const std::size_t label = mask.labels.at(x, y);
          const float px = static_cast<float>(x) + 0.5f;
          const float py = static_cast<float>(y) + 0.5f;
          double transmittance = 1.0;
          for (std::size_t pos = 0; pos < list.size(); ++pos) {
            const std::uint32_t j = list[pos];
            const float alpha = contribution_alpha(
                view.projected[j], view.opacity[j], px, py, cfg);
            if (alpha < 0.0f) continue;
            if (cfg.use_occlusion) {
              acc[pos * L + label] += alpha * transmittance;
              transmittance *= 1.0 - alpha;
              if (transmittance < cfg.transmittance_floor) break;
            } else {
              acc[pos * L + label] += alpha;
            }
          }
        }
      }
    }
  });

  WeightMatrix weights(static_cast<std::size_t>(scene.gaussian_count()), L);
  for (std::size_t tile = 0; tile < grid.lists.size(); ++tile) {
    const auto& list = grid.lists[tile];
    const auto& acc = partials[tile];
    for (std::size_t pos = 0; pos < list.size(); ++pos) {
      const int i = view.projected[list[pos]].source_index;
      for (std::size_t l = 0; l < L; ++l) {
        const double w = acc[pos * L + l];
        if (w != 0.0)
          weights.add(static_cast<std::size_t>(i),
                      static_cast<std::uint16_t>(l), w);
      }
    }
  }
  return weights;
}

RenderOutput render_view(const DynamicScene& scene, const CameraView& camera,
                         const TraceConfig& cfg) {
  const PreparedView view = prepare_view(scene, camera, cfg);
  const TileGrid grid = bin_tiles(view, camera.width, camera.height);

  RenderOutput out;
  out.rgb = Image<float>(camera.width, camera.height, 3, 0.0f);
  out.alpha = Image<float>(camera.width, camera.height, 1, 0.0f);

  parallel_for(grid.lists.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t tile = begin; tile < end; ++tile) {
      const auto& list = grid.lists[tile];
      const int tx = static_cast<int>(tile) % grid.tiles_x;
      const int ty = static_cast<int>(tile) / grid.tiles_x;
      const int x_end = std::min(camera.width, (tx + 1) * kTileSize);
      const int y_end = std::min(camera.height, (ty + 1) * kTileSize);
      for (int y = ty * kTileSize; y < y_end; ++y) {
        for (int x = tx * kTileSize; x < x_end; ++x) {
          const float px = static_cast<float>(x) + 0.5f;
          const float py = static_cast<float>(y) + 0.5f;
          double transmittance = 1.0;
          double r = 0.0, g = 0.0, b = 0.0;
          for (const std::uint32_t j : list) {
            const float alpha = contribution_alpha(
                view.projected[j], view.opacity[j], px, py, cfg);
            if (alpha < 0.0f) continue;
            const double w = alpha * transmittance;
            r += view.color[j].x() * w;
            g += view.color[j].y() * w;
            b += view.color[j].z() * w;
            transmittance *= 1.0 - alpha;
            if (transmittance < cfg.transmittance_floor) break;
          }
          out.rgb.at(x, y, 0) = static_cast<float>(r);
          out.rgb.at(x, y, 1) = static_cast<float>(g);
          out.rgb.at(x, y, 2) = static_cast<float>(b);
          out.alpha.at(x, y) = static_cast<float>(1.0 - transmittance);
        }
      }
    }
  });
  return out;
}

WeightMatrix oracle_trace_view(const DynamicScene& scene,
                               const CameraView& camera,
                               const InstanceMask& mask, int label_count,
                               const TraceConfig& cfg) {
  if (label_count < 1) throw ValidationError("label count must be positive");
  check_mask(mask, camera, label_count);
  const PreparedView view = prepare_view(scene, camera, cfg);

  WeightMatrix weights(static_cast<std::size_t>(scene.gaussian_count()),
                       static_cast<std::size_t>(label_count));
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const std::uint16_t label = mask.labels.at(x, y);
      const float px = static_cast<float>(x) + 0.5f;
      const float py = static_cast<float>(y) + 0.5f;
      double transmittance = 1.0;
      for (std::size_t j = 0; j < view.projected.size(); ++j) {
        const float alpha = contribution_alpha(view.projected[j],
                                               view.opacity[j], px, py, cfg);
        if (alpha < 0.0f) continue;
        if (cfg.use_occlusion) {
          weights.add(
              static_cast<std::size_t>(view.projected[j].source_index), label,
              alpha * transmittance);
          transmittance *= 1.0 - alpha;
          if (transmittance < cfg.transmittance_floor) break;
        } else {
          weights.add(
              static_cast<std::size_t>(view.projected[j].source_index), label,
              alpha);
        }
      }
    }
  }
  return weights;
}

RenderOutput oracle_render_view(const DynamicScene& scene,
                                const CameraView& camera,
                                const TraceConfig& cfg) {
  const PreparedView view = prepare_view(scene, camera, cfg);
  RenderOutput out;
  out.rgb = Image<float>(camera.width, camera.height, 3, 0.0f);
  out.alpha = Image<float>(camera.width, camera.height, 1, 0.0f);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const float px = static_cast<float>(x) + 0.5f;
      const float py = static_cast<float>(y) + 0.5f;
      double transmittance = 1.0;
      double r = 0.0, g = 0.0, b = 0.0;
      for (std::size_t j = 0; j < view.projected.size(); ++j) {
        const float alpha = contribution_alpha(view.projected[j],
                                               view.opacity[j], px, py, cfg);
        if (alpha < 0.0f) continue;
        const double w = alpha * transmittance;
        r += view.color[j].x() * w;
        g += view.color[j].y() * w;
        b += view.color[j].z() * w;
        transmittance *= 1.0 - alpha;
        if (transmittance < cfg.transmittance_floor) break;
      }
      out.rgb.at(x, y, 0) = static_cast<float>(r);
      out.rgb.at(x, y, 1) = static_cast<float>(g);
      out.rgb.at(x, y, 2) = static_cast<float>(b);
      out.alpha.at(x, y) = static_cast<float>(1.0 - transmittance);
    }
  }
  return out;
}

Image<std::uint16_t> binarize_alpha(const Image<float>& alpha) {
  Image<std::uint16_t> out(alpha.width, alpha.height);
  for (std::size_t i = 0; i < alpha.data.size(); ++i)
    out.data[i] = alpha.data[i] > 0.5f ? 1 : 0;
  return out;
}

}  // namespace splatseg

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "splatseg/image.hpp"
#include "splatseg/types.hpp"

namespace splatseg {

inline constexpr int kTileSize = 16;
inline constexpr float kMaxContributionAlpha = 0.99f;

struct TraceConfig {
  // Gaussians with a false entry contribute neither weight nor occlusion.
  const std::vector<std::uint8_t>* subset_mask = nullptr;
  // When false, contributions are o*g without transmittance and the
  // early-exit floor is inactive (every contribution must be counted).
  bool use_occlusion = true;
  // Per-Gaussian rendering ranges r in [0,1]: a contribution is kept only
  // where g > 1 - r. Null means no truncation.
  const std::vector<float>* range_thresholds = nullptr;
  // Kernel values at or below this are dropped.
  float alpha_cutoff = 1.0f / 255.0f;
  // Pixel loop stops once transmittance falls below this (occlusion only).
  float transmittance_floor = 1e-4f;

  void validate(int gaussian_count) const;
};

// N x (K+1) weight accumulator, column 0 = background. Rows are sparse
// (label, weight) pairs sorted by label; most Gaussians touch few labels.
class WeightMatrix {
 public:
  using Row = std::vector<std::pair<std::uint16_t, double>>;

  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::size_t cols)
      : cols_(cols), rows_(rows) {}

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }

  void add(std::size_t gaussian, std::uint16_t label, double weight);
  double value(std::size_t gaussian, std::uint16_t label) const;
  double row_sum(std::size_t gaussian) const;
  const Row& row(std::size_t gaussian) const { return rows_[gaussian]; }
  bool row_empty(std::size_t gaussian) const {
    return rows_[gaussian].empty();
  }
  double max_value() const;

  WeightMatrix& operator+=(const WeightMatrix& other);

 private:
  std::size_t cols_ = 0;
  std::vector<Row> rows_;
};

struct RenderOutput {
  Image<float> rgb;    // 3 channels
  Image<float> alpha;  // 1 channel, 1 - final transmittance
};

// Tile-parallel front-to-back weight accumulation of one view against its
// instance mask. label_count is K+1; every mask label must be below it.
// Output is byte-identical across runs and thread counts: per-tile partial
// sums are reduced in tile-index order.
WeightMatrix trace_view(const DynamicScene& scene, const CameraView& camera,
                        const InstanceMask& mask, int label_count,
                        const TraceConfig& cfg);

// Front-to-back compositing with the same contribution filters as
// trace_view. Rendering always attenuates by transmittance; cfg.use_occlusion
// only changes tracing.
RenderOutput render_view(const DynamicScene& scene, const CameraView& camera,
                         const TraceConfig& cfg);

// Brute-force single-threaded references: per pixel, walk the full
// depth-sorted Gaussian list with no tiling. Used to pin the tiled paths.
WeightMatrix oracle_trace_view(const DynamicScene& scene,
                               const CameraView& camera,
                               const InstanceMask& mask, int label_count,
                               const TraceConfig& cfg);
RenderOutput oracle_render_view(const DynamicScene& scene,
                                const CameraView& camera,
                                const TraceConfig& cfg);

// alpha > 0.5 binarization of a rendered view.
Image<std::uint16_t> binarize_alpha(const Image<float>& alpha);

}  // namespace splatseg

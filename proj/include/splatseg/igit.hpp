// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splatseg/rasterizer.hpp"
#include "splatseg/types.hpp"

namespace splatseg {

// One training view: a camera, its instance mask, and a stable id that fixes
// the summation order regardless of how the caller arranges the list.
struct ViewRef {
  const CameraView* camera = nullptr;
  const InstanceMask* mask = nullptr;
  int id = 0;
};

// Boolean membership over Gaussians.
struct SegmentMask {
  std::vector<std::uint8_t> member;

  std::size_t count() const;
  bool operator==(const SegmentMask& other) const = default;
};

SegmentMask unite(const SegmentMask& a, const SegmentMask& b);

// Row-normalized weights. Rows are on the probability simplex or all-zero.
class ProbabilityMatrix {
 public:
  using Row = std::vector<std::pair<std::uint16_t, double>>;

  ProbabilityMatrix() = default;
  ProbabilityMatrix(std::size_t rows, std::size_t cols)
      : cols_(cols), rows_(rows) {}

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  Row& row(std::size_t gaussian) { return rows_[gaussian]; }
  const Row& row(std::size_t gaussian) const { return rows_[gaussian]; }
  double value(std::size_t gaussian, std::uint16_t label) const;
  double row_sum(std::size_t gaussian) const;

 private:
  std::size_t cols_ = 0;
  std::vector<Row> rows_;
};

// Sums trace_view over the given views in ascending ViewRef::id order.
WeightMatrix accumulate_segment(const DynamicScene& scene,
                                std::span<const ViewRef> views,
                                int label_count, const TraceConfig& cfg);

// L1-normalizes each row; all-zero rows stay all-zero.
ProbabilityMatrix normalize(const WeightMatrix& weights);

// True where the row argmax equals target_id. Ties resolve to the lowest
// label; all-zero rows are excluded.
SegmentMask extract(const ProbabilityMatrix& probabilities, int target_id);

// One trace-normalize-extract pass. restrict_to = nullptr traces the full
// scene; otherwise excluded Gaussians contribute neither weight nor
// occlusion.
SegmentMask igit_sweep(const DynamicScene& scene,
                       std::span<const ViewRef> views, int label_count,
                       int target_id, const TraceConfig& cfg,
                       const SegmentMask* restrict_to);

struct IgitResult {
  SegmentMask mask;
  int iterations = 0;
  bool converged = false;
};

// Iterates sweeps, each restricted to the previous extraction, until the
// mask reaches a fixed point or max_iters.
IgitResult igit_run(const DynamicScene& scene, std::span<const ViewRef> views,
                    int label_count, int target_id, int max_iters,
                    const TraceConfig& cfg);

}  // namespace splatseg

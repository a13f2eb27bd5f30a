// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "splatseg/igit.hpp"

namespace splatseg {

// Contiguous partition of [0, total_timestamps) with one membership mask per
// segment. starts is ascending and begins at 0.
struct TemporalSegments {
  std::vector<int> starts;
  std::vector<SegmentMask> masks;
  int total_timestamps = 0;

  std::size_t size() const { return starts.size(); }
  int segment_of(int timestamp) const;
  int segment_end(std::size_t segment) const;  // one past the last timestamp
  void validate() const;
};

// Membership IoU between two segment masks; two empty masks count as 1.
double segment_iou(const SegmentMask& a, const SegmentMask& b);

// One greedy left-to-right pass: adjacent segments with IoU > tau merge,
// and a merged segment keeps absorbing its next neighbor in the same pass.
// Merged masks are unions (warm starts, re-traced by the caller's next
// sweep).
TemporalSegments merge_pass(const TemporalSegments& segments, double tau);

struct TemporalResult {
  TemporalSegments segments;
  int iterations = 0;
  bool converged = false;
  int total_sweeps = 0;
};

// Starts from one segment per distinct view timestamp. Each outer iteration
// runs one sweep per segment (over that segment's views only), then one
// merge pass; stops when neither boundaries nor masks changed, or at
// max_iters.
TemporalResult temporal_igit_run(const DynamicScene& scene,
                                 std::span<const ViewRef> views,
                                 int label_count, int target_id, int max_iters,
                                 double tau, const TraceConfig& cfg);

// JSON file with total_timestamps, gaussian_count, and per-segment
// start/end/member indices. A segment saved without members loads as an
// all-false mask.
void save_segments(const TemporalSegments& segments, int gaussian_count,
                   const std::filesystem::path& path);
TemporalSegments load_segments(const std::filesystem::path& path);

}  // namespace splatseg

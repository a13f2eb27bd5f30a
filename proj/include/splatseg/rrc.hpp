// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splatseg/temporal.hpp"

namespace splatseg {

inline constexpr double kRangeEarlyStop = 1e-4;
// Probabilities at or above this snap to 1 so float dust cannot cause an
// endless geometric decay of thresholds that should stay at 1.
inline constexpr double kProbabilitySnap = 0.999;

// Sparse per-frame scalar field keyed on (gaussian, timestamp). frames[t]
// holds (gaussian, value) pairs sorted by gaussian index.
struct SparseFrameField {
  std::vector<std::vector<std::pair<std::uint32_t, float>>> frames;

  int frame_count() const { return static_cast<int>(frames.size()); }
  float value_or(int gaussian, int t, float fallback) const;
  void set(int gaussian, int t, float value);

  // Dense per-Gaussian vector for frame t. Keyed entries get their value;
  // everything else gets `fill`. A frame with no entries at all returns
  // all `empty_fill` (no evidence recorded for that frame).
  std::vector<float> densify(int t, int gaussian_count, float fill,
                             float empty_fill) const;

  bool operator==(const SparseFrameField& other) const = default;
};

using RangeThresholds = SparseFrameField;
using FrameProbabilities = SparseFrameField;

// Occlusion-free per-frame trace of each segment's members: the initial
// threshold is the in-mask probability p = W[:, target] / ||W||_1 (rows
// summed over all views sharing the timestamp before normalizing).
RangeThresholds rrc_init(const DynamicScene& scene,
                         std::span<const ViewRef> views,
                         const TemporalSegments& segments, int label_count,
                         int target_id, const TraceConfig& cfg);

struct RrcStepResult {
  RangeThresholds thresholds;
  FrameProbabilities probabilities;
  double max_delta = 0.0;
};

// One Jacobi-style refinement: every frame is re-traced against the current
// thresholds (truncated, occlusion-free), then r <- r * p is applied after
// the full sweep. p snaps to 1 above kProbabilitySnap.
RrcStepResult rrc_step(const DynamicScene& scene,
                       std::span<const ViewRef> views,
                       const TemporalSegments& segments,
                       const RangeThresholds& current, int label_count,
                       int target_id, const TraceConfig& cfg);

struct RrcResult {
  RangeThresholds thresholds;
  int iterations = 0;
  bool converged = false;
};

// rrc_init followed by up to max_iters steps; stops early once
// max |delta r| < kRangeEarlyStop.
RrcResult rrc_run(const DynamicScene& scene, std::span<const ViewRef> views,
                  const TemporalSegments& segments, int label_count,
                  int target_id, int max_iters, const TraceConfig& cfg);

// Range-controlled render of the segment owning the camera's timestamp.
// thresholds may be null (no truncation).
RenderOutput render_segmented(const DynamicScene& scene,
                              const CameraView& camera,
                              const TemporalSegments& segments,
                              const RangeThresholds* thresholds,
                              const TraceConfig& cfg);

// "G4DR" magic, u32 frame_count, u32 entry_count, then (u32 gaussian,
// u32 timestamp, f32 value) little-endian triples sorted by
// (timestamp, gaussian).
void save_ranges(const RangeThresholds& thresholds,
                 const std::filesystem::path& path);
RangeThresholds load_ranges(const std::filesystem::path& path);

}  // namespace splatseg

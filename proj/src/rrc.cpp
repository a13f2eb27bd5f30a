// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/rrc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace splatseg {

float SparseFrameField::value_or(int gaussian, int t, float fallback) const {
  if (t < 0 || t >= frame_count()) return fallback;
  const auto& entries = frames[t];
  auto it = std::lower_bound(
      entries.begin(), entries.end(), static_cast<std::uint32_t>(gaussian),
      [](const std::pair<std::uint32_t, float>& e, std::uint32_t g) {
        return e.first < g;
      });
  if (it != entries.end() &&
      it->first == static_cast<std::uint32_t>(gaussian))
    return it->second;
  return fallback;
}

void SparseFrameField::set(int gaussian, int t, float value) {
  if (t < 0) throw ValidationError("frame index must be non-negative");
  if (t >= frame_count()) frames.resize(t + 1);
  auto& entries = frames[t];
  auto it = std::lower_bound(
      entries.begin(), entries.end(), static_cast<std::uint32_t>(gaussian),
      [](const std::pair<std::uint32_t, float>& e, std::uint32_t g) {
        return e.first < g;
      });
  if (it != entries.end() &&
      it->first == static_cast<std::uint32_t>(gaussian)) {
    it->second = value;
  } else {
    entries.insert(it, {static_cast<std::uint32_t>(gaussian), value});
  }
}

std::vector<float> SparseFrameField::densify(int t, int gaussian_count,
                                             float fill,
                                             float empty_fill) const {
  if (t < 0 || t >= frame_count() || frames[t].empty())
    return std::vector<float>(gaussian_count, empty_fill);
  std::vector<float> dense(gaussian_count, fill);
  for (const auto& [g, v] : frames[t]) {
    if (g >= static_cast<std::uint32_t>(gaussian_count))
      throw ValidationError("frame field index out of range");
    dense[g] = v;
  }
  return dense;
}

namespace {

struct FrameViews {
  int timestamp = 0;
  std::vector<const ViewRef*> views;  // ascending id
};

std::vector<FrameViews> group_by_timestamp(std::span<const ViewRef> views) {
  std::map<int, std::vector<const ViewRef*>> grouped;
  for (const ViewRef& v : views) {
    if (v.camera == nullptr || v.mask == nullptr)
      throw ValidationError("view references must be non-null");
    grouped[v.camera->timestamp].push_back(&v);
  }
  std::vector<FrameViews> out;
  out.reserve(grouped.size());
  for (auto& [t, list] : grouped) {
    std::stable_sort(list.begin(), list.end(),
                     [](const ViewRef* a, const ViewRef* b) {
                       return a->id < b->id;
                     });
    out.push_back({t, std::move(list)});
  }
  return out;
}

std::vector<std::uint8_t> subset_for_segment(const TraceConfig& cfg,
                                             const SegmentMask& mask,
                                             int gaussian_count) {
  std::vector<std::uint8_t> subset;
  if (mask.member.empty()) {
    subset.assign(gaussian_count, 0);
  } else {
    if (mask.member.size() != static_cast<std::size_t>(gaussian_count))
      throw ValidationError("segment mask size mismatch");
    subset = mask.member;
  }
  if (cfg.subset_mask != nullptr) {
    if (cfg.subset_mask->size() != subset.size())
      throw ValidationError("subset mask size mismatch");
    for (std::size_t i = 0; i < subset.size(); ++i)
      subset[i] = (subset[i] && (*cfg.subset_mask)[i]) ? 1 : 0;
  }
  return subset;
}

// Occlusion-free in-mask weights for one frame, summed over its views.
WeightMatrix frame_weights(const DynamicScene& scene, const FrameViews& frame,
                           const std::vector<std::uint8_t>& subset,
                           const std::vector<float>* thresholds,
                           int label_count, const TraceConfig& cfg) {
  TraceConfig frame_cfg = cfg;
  frame_cfg.subset_mask = &subset;
  frame_cfg.use_occlusion = false;
  frame_cfg.range_thresholds = thresholds;
  WeightMatrix total(static_cast<std::size_t>(scene.gaussian_count()),
                     static_cast<std::size_t>(label_count));
  for (const ViewRef* v : frame.views)
    total += trace_view(scene, *v->camera, *v->mask, label_count, frame_cfg);
  return total;
}

double in_mask_probability(const WeightMatrix& weights, std::size_t gaussian,
                           int target_id) {
  const double sum = weights.row_sum(gaussian);
  if (sum <= 0.0) return 0.0;
  return weights.value(gaussian, static_cast<std::uint16_t>(target_id)) / sum;
}

}  // namespace

RangeThresholds rrc_init(const DynamicScene& scene,
                         std::span<const ViewRef> views,
                         const TemporalSegments& segments, int label_count,
                         int target_id, const TraceConfig& cfg) {
  segments.validate();
  if (segments.total_timestamps != scene.timestamp_count())
    throw ValidationError("segments do not cover the scene's timestamps");
  if (target_id < 1 || target_id >= label_count)
    throw ValidationError("target id must be a foreground label");

  RangeThresholds thresholds;
  thresholds.frames.resize(scene.timestamp_count());
  for (const FrameViews& frame : group_by_timestamp(views)) {
    const SegmentMask& mask =
        segments.masks[segments.segment_of(frame.timestamp)];
    if (mask.member.empty()) continue;
    const std::vector<std::uint8_t> subset =
        subset_for_segment(cfg, mask, scene.gaussian_count());
    const WeightMatrix weights =
        frame_weights(scene, frame, subset, nullptr, label_count, cfg);
    for (int i = 0; i < scene.gaussian_count(); ++i) {
      if (!subset[i]) continue;
      thresholds.set(
          i, frame.timestamp,
          static_cast<float>(in_mask_probability(weights, i, target_id)));
    }
  }
  return thresholds;
}

RrcStepResult rrc_step(const DynamicScene& scene,
                       std::span<const ViewRef> views,
                       const TemporalSegments& segments,
                       const RangeThresholds& current, int label_count,
                       int target_id, const TraceConfig& cfg) {
  segments.validate();
  if (target_id < 1 || target_id >= label_count)
    throw ValidationError("target id must be a foreground label");

  RrcStepResult result;
  result.thresholds = current;
  result.probabilities.frames.resize(current.frames.size());

  for (const FrameViews& frame : group_by_timestamp(views)) {
    const int t = frame.timestamp;
    if (t >= current.frame_count() || current.frames[t].empty()) continue;
    const SegmentMask& mask = segments.masks[segments.segment_of(t)];
    const std::vector<std::uint8_t> subset =
        subset_for_segment(cfg, mask, scene.gaussian_count());
    // The whole frame is re-traced against the incoming thresholds; updates
    // land in the result only, so order within the sweep cannot matter.
    const std::vector<float> dense =
        current.densify(t, scene.gaussian_count(), 0.0f, 0.0f);
    const WeightMatrix weights =
        frame_weights(scene, frame, subset, &dense, label_count, cfg);
    for (const auto& [g, r] : current.frames[t]) {
      double p = in_mask_probability(weights, g, target_id);
      if (p >= kProbabilitySnap) p = 1.0;
      const float updated = static_cast<float>(r * p);
      result.max_delta =
          std::max(result.max_delta,
                   std::abs(static_cast<double>(updated) - r));
      result.probabilities.set(static_cast<int>(g), t,
                               static_cast<float>(p));
      result.thresholds.set(static_cast<int>(g), t, updated);
    }
  }
  return result;
}

RrcResult rrc_run(const DynamicScene& scene, std::span<const ViewRef> views,
                  const TemporalSegments& segments, int label_count,
                  int target_id, int max_iters, const TraceConfig& cfg) {
  if (max_iters < 1) throw ValidationError("max_iters must be positive");
  RrcResult result;
  result.thresholds =
      rrc_init(scene, views, segments, label_count, target_id, cfg);
  for (int it = 1; it <= max_iters; ++it) {
    RrcStepResult step = rrc_step(scene, views, segments, result.thresholds,
                                  label_count, target_id, cfg);
    result.thresholds = std::move(step.thresholds);
    result.iterations = it;
    if (step.max_delta < kRangeEarlyStop) {
      result.converged = true;
      break;
    }
  }
  return result;
}

RenderOutput render_segmented(const DynamicScene& scene,
                              const CameraView& camera,
                              const TemporalSegments& segments,
                              const RangeThresholds* thresholds,
                              const TraceConfig& cfg) {
  segments.validate();
  if (segments.total_timestamps != scene.timestamp_count())
    throw ValidationError("segments do not cover the scene's timestamps");
  const SegmentMask& mask =
      segments.masks[segments.segment_of(camera.timestamp)];
  const std::vector<std::uint8_t> subset =
      subset_for_segment(cfg, mask, scene.gaussian_count());

  TraceConfig render_cfg = cfg;
  render_cfg.subset_mask = &subset;
  std::vector<float> dense;
  if (thresholds != nullptr) {
    // Frames nothing was keyed on render untruncated.
    dense = thresholds->densify(camera.timestamp, scene.gaussian_count(),
                                0.0f, 1.0f);
    render_cfg.range_thresholds = &dense;
  } else {
    render_cfg.range_thresholds = nullptr;
  }
  return render_view(scene, camera, render_cfg);
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

void write_f32(std::ofstream& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

std::uint32_t read_u32(std::ifstream& in, const std::string& what) {
  char buf[4];
  if (!in.read(buf, 4)) throw FormatError("truncated range file: " + what);
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

float read_f32(std::ifstream& in, const std::string& what) {
  char buf[4];
  if (!in.read(buf, 4)) throw FormatError("truncated range file: " + what);
  float v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

void save_ranges(const RangeThresholds& thresholds,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("G4DR", 4);
  write_u32(out, static_cast<std::uint32_t>(thresholds.frame_count()));
  std::uint32_t count = 0;
  for (const auto& frame : thresholds.frames)
    count += static_cast<std::uint32_t>(frame.size());
  write_u32(out, count);
  for (std::uint32_t t = 0;
       t < static_cast<std::uint32_t>(thresholds.frame_count()); ++t) {
    for (const auto& [g, r] : thresholds.frames[t]) {
      write_u32(out, g);
      write_u32(out, t);
      write_f32(out, r);
    }
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

RangeThresholds load_ranges(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "G4DR", 4) != 0)
    throw FormatError("not a range file: " + path.string());
  const std::uint32_t frame_count = read_u32(in, "frame count");
  const std::uint32_t entry_count = read_u32(in, "entry count");

  RangeThresholds thresholds;
  thresholds.frames.resize(frame_count);
  std::int64_t prev_t = -1;
  std::int64_t prev_g = -1;
  for (std::uint32_t k = 0; k < entry_count; ++k) {
    const std::uint32_t g = read_u32(in, "gaussian index");
    const std::uint32_t t = read_u32(in, "timestamp");
    const float r = read_f32(in, "threshold");
    if (t >= frame_count)
      throw FormatError("range entry timestamp out of bounds");
    if (static_cast<std::int64_t>(t) < prev_t ||
        (static_cast<std::int64_t>(t) == prev_t &&
         static_cast<std::int64_t>(g) <= prev_g))
      throw FormatError("range entries must be sorted by timestamp then "
                        "gaussian");
    if (!std::isfinite(r) || r < 0.0f || r > 1.0f)
      throw FormatError("range threshold outside [0,1]");
    prev_t = t;
    prev_g = g;
    thresholds.frames[t].emplace_back(g, r);
  }
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("trailing bytes in range file " + path.string());
  return thresholds;
}

}  // namespace splatseg

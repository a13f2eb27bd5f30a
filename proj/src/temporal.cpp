// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/temporal.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace splatseg {

int TemporalSegments::segment_of(int timestamp) const {
  if (timestamp < 0 || timestamp >= total_timestamps)
    throw ValidationError("timestamp outside the segmented range");
  auto it = std::upper_bound(starts.begin(), starts.end(), timestamp);
  return static_cast<int>(it - starts.begin()) - 1;
}

int TemporalSegments::segment_end(std::size_t segment) const {
  return segment + 1 < starts.size() ? starts[segment + 1] : total_timestamps;
}

void TemporalSegments::validate() const {
  if (starts.empty()) throw ValidationError("segments must be non-empty");
  if (starts.front() != 0) throw ValidationError("segments must start at 0");
  for (std::size_t s = 1; s < starts.size(); ++s)
    if (starts[s] <= starts[s - 1])
      throw ValidationError("segment starts must be strictly increasing");
  if (total_timestamps <= starts.back())
    throw ValidationError("segments extend past the timestamp range");
  if (masks.size() != starts.size())
    throw ValidationError("one mask is required per segment");
  std::size_t gaussians = 0;
  for (const SegmentMask& m : masks)
    if (!m.member.empty()) {
      if (gaussians == 0) gaussians = m.member.size();
      if (m.member.size() != gaussians)
        throw ValidationError("segment masks disagree on gaussian count");
    }
}

double segment_iou(const SegmentMask& a, const SegmentMask& b) {
  if (!a.member.empty() && !b.member.empty() &&
      a.member.size() != b.member.size())
    throw ValidationError("segment mask size mismatch");
  const std::size_t n = std::max(a.member.size(), b.member.size());
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_a = i < a.member.size() && a.member[i];
    const bool in_b = i < b.member.size() && b.member[i];
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

TemporalSegments merge_pass(const TemporalSegments& segments, double tau) {
  segments.validate();
  TemporalSegments out;
  out.total_timestamps = segments.total_timestamps;
  out.starts.push_back(segments.starts[0]);
  out.masks.push_back(segments.masks[0]);
  for (std::size_t s = 1; s < segments.size(); ++s) {
    if (segment_iou(out.masks.back(), segments.masks[s]) > tau) {
      out.masks.back() = unite(out.masks.back(), segments.masks[s]);
    } else {
      out.starts.push_back(segments.starts[s]);
      out.masks.push_back(segments.masks[s]);
    }
  }
  return out;
}

TemporalResult temporal_igit_run(const DynamicScene& scene,
                                 std::span<const ViewRef> views,
                                 int label_count, int target_id, int max_iters,
                                 double tau, const TraceConfig& cfg) {
  if (views.empty()) throw ValidationError("at least one view is required");
  if (max_iters < 1) throw ValidationError("max_iters must be positive");
  if (tau < 0.0 || tau > 1.0)
    throw ValidationError("tau must lie in [0,1]");

  std::set<int> stamps;
  for (const ViewRef& v : views) {
    if (v.camera == nullptr || v.mask == nullptr)
      throw ValidationError("view references must be non-null");
    if (v.camera->timestamp >= scene.timestamp_count())
      throw ValidationError("view timestamp outside the scene");
    stamps.insert(v.camera->timestamp);
  }

  TemporalResult result;
  TemporalSegments& segments = result.segments;
  segments.total_timestamps = scene.timestamp_count();
  if (!stamps.count(0)) segments.starts.push_back(0);
  segments.starts.insert(segments.starts.end(), stamps.begin(), stamps.end());
  segments.masks.resize(segments.starts.size());  // unset until first sweep

  for (int it = 1; it <= max_iters; ++it) {
    result.iterations = it;
    bool changed = false;

    for (std::size_t s = 0; s < segments.size(); ++s) {
      std::vector<ViewRef> in_segment;
      for (const ViewRef& v : views)
        if (segments.segment_of(v.camera->timestamp) == static_cast<int>(s))
          in_segment.push_back(v);
      if (in_segment.empty()) continue;

      const SegmentMask& current = segments.masks[s];
      SegmentMask next =
          igit_sweep(scene, in_segment, label_count, target_id, cfg,
                     current.member.empty() ? nullptr : &current);
      ++result.total_sweeps;
      if (next != current) {
        segments.masks[s] = std::move(next);
        changed = true;
      }
    }

    TemporalSegments merged = merge_pass(segments, tau);
    if (merged.size() != segments.size()) changed = true;
    segments = std::move(merged);

    if (!changed) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void save_segments(const TemporalSegments& segments, int gaussian_count,
                   const std::filesystem::path& path) {
  segments.validate();
  nlohmann::json doc;
  doc["total_timestamps"] = segments.total_timestamps;
  doc["gaussian_count"] = gaussian_count;
  doc["segments"] = nlohmann::json::array();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    nlohmann::json seg;
    seg["start"] = segments.starts[s];
    seg["end"] = segments.segment_end(s);
    nlohmann::json members = nlohmann::json::array();
    const SegmentMask& m = segments.masks[s];
    for (std::size_t i = 0; i < m.member.size(); ++i)
      if (m.member[i]) members.push_back(i);
    seg["members"] = std::move(members);
    doc["segments"].push_back(std::move(seg));
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

TemporalSegments load_segments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  TemporalSegments segments;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    segments.total_timestamps = doc.at("total_timestamps").get<int>();
    const int gaussian_count = doc.at("gaussian_count").get<int>();
    if (gaussian_count <= 0)
      throw FormatError("gaussian_count must be positive");
    for (const nlohmann::json& seg : doc.at("segments")) {
      segments.starts.push_back(seg.at("start").get<int>());
      SegmentMask mask;
      mask.member.assign(static_cast<std::size_t>(gaussian_count), 0);
      for (const nlohmann::json& m : seg.at("members")) {
        const int i = m.get<int>();
        if (i < 0 || i >= gaussian_count)
          throw FormatError("segment member index out of range");
        mask.member[static_cast<std::size_t>(i)] = 1;
      }
      segments.masks.push_back(std::move(mask));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed segments file " + path.string() + ": " +
                      e.what());
  }
  segments.validate();
  return segments;
}

}  // namespace splatseg

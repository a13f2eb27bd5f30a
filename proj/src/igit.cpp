// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/igit.hpp"

#include <algorithm>
#include <limits>

namespace splatseg {

std::size_t SegmentMask::count() const {
  std::size_t n = 0;
  for (std::uint8_t m : member) n += m != 0;
  return n;
}

SegmentMask unite(const SegmentMask& a, const SegmentMask& b) {
  if (a.member.empty()) return b;
  if (b.member.empty()) return a;
  if (a.member.size() != b.member.size())
    throw ValidationError("segment mask size mismatch");
  SegmentMask out;
  out.member.resize(a.member.size());
  for (std::size_t i = 0; i < a.member.size(); ++i)
    out.member[i] = (a.member[i] || b.member[i]) ? 1 : 0;
  return out;
}

double ProbabilityMatrix::value(std::size_t gaussian,
                                std::uint16_t label) const {
  for (const auto& [l, p] : rows_[gaussian])
    if (l == label) return p;
  return 0.0;
}

double ProbabilityMatrix::row_sum(std::size_t gaussian) const {
  double s = 0.0;
  for (const auto& [l, p] : rows_[gaussian]) s += p;
  return s;
}

WeightMatrix accumulate_segment(const DynamicScene& scene,
                                std::span<const ViewRef> views,
                                int label_count, const TraceConfig& cfg) {
  std::vector<const ViewRef*> order;
  order.reserve(views.size());
  for (const ViewRef& v : views) {
    if (v.camera == nullptr || v.mask == nullptr)
      throw ValidationError("view references must be non-null");
    order.push_back(&v);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const ViewRef* a, const ViewRef* b) {
                     return a->id < b->id;
                   });

  WeightMatrix total(static_cast<std::size_t>(scene.gaussian_count()),
                     static_cast<std::size_t>(label_count));
  for (const ViewRef* v : order)
    total += trace_view(scene, *v->camera, *v->mask, label_count, cfg);
  return total;
}

ProbabilityMatrix normalize(const WeightMatrix& weights) {
  ProbabilityMatrix probabilities(weights.rows(), weights.cols());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const double s = weights.row_sum(i);
    if (s <= 0.0) continue;
    ProbabilityMatrix::Row& out = probabilities.row(i);
    out.reserve(weights.row(i).size());
    for (const auto& [l, w] : weights.row(i)) out.emplace_back(l, w / s);
  }
  return probabilities;
}

SegmentMask extract(const ProbabilityMatrix& probabilities, int target_id) {
  SegmentMask mask;
  mask.member.assign(probabilities.rows(), 0);
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    const ProbabilityMatrix::Row& row = probabilities.row(i);
    if (row.empty()) continue;
    double best = 0.0;
    int best_label = std::numeric_limits<int>::max();
    // Rows are sorted by label, so a strict comparison resolves ties to the
    // lowest label. Absent labels hold zero and can never win against a
    // positive entry.
    for (const auto& [l, p] : row) {
      if (p > best) {
        best = p;
        best_label = l;
      }
    }
    mask.member[i] = (best > 0.0 && best_label == target_id) ? 1 : 0;
  }
  return mask;
}

namespace {

// Intersection of the caller's static subset (if any) with the iteration's
// restriction mask.
std::vector<std::uint8_t> combine_subset(const TraceConfig& cfg,
                                         const SegmentMask& restrict_to) {
  std::vector<std::uint8_t> combined = restrict_to.member;
  if (cfg.subset_mask != nullptr) {
    if (cfg.subset_mask->size() != combined.size())
      throw ValidationError("subset mask size mismatch");
    for (std::size_t i = 0; i < combined.size(); ++i)
      combined[i] = (combined[i] && (*cfg.subset_mask)[i]) ? 1 : 0;
  }
  return combined;
}

}  // namespace

SegmentMask igit_sweep(const DynamicScene& scene,
                       std::span<const ViewRef> views, int label_count,
                       int target_id, const TraceConfig& cfg,
                       const SegmentMask* restrict_to) {
  if (target_id < 1 || target_id >= label_count)
    throw ValidationError("target id must be a foreground label");

  TraceConfig sweep_cfg = cfg;
  std::vector<std::uint8_t> combined;
  if (restrict_to != nullptr) {
    if (restrict_to->member.size() !=
        static_cast<std::size_t>(scene.gaussian_count()))
      throw ValidationError("restriction mask size mismatch");
    combined = combine_subset(cfg, *restrict_to);
    sweep_cfg.subset_mask = &combined;
  }

  const WeightMatrix weights =
      accumulate_segment(scene, views, label_count, sweep_cfg);
  return extract(normalize(weights), target_id);
}

IgitResult igit_run(const DynamicScene& scene, std::span<const ViewRef> views,
                    int label_count, int target_id, int max_iters,
                    const TraceConfig& cfg) {
  if (max_iters < 1) throw ValidationError("max_iters must be positive");

  IgitResult result;
  result.mask = igit_sweep(scene, views, label_count, target_id, cfg, nullptr);
  result.iterations = 1;
  for (int it = 2; it <= max_iters; ++it) {
    SegmentMask next =
        igit_sweep(scene, views, label_count, target_id, cfg, &result.mask);
    result.iterations = it;
    if (next == result.mask) {
      result.converged = true;
      break;
    }
    result.mask = std::move(next);
  }
  return result;
}

}  // namespace splatseg

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "splatseg/rasterizer.hpp"

namespace splatseg {

struct PipelineConfig {
  std::filesystem::path scene_path;
  std::filesystem::path cameras_path;
  std::filesystem::path masks_dir;
  std::filesystem::path output_dir;
  int target_id = 1;
  int igit_max_iters = 20;
  int rrc_max_iters = 20;
  double tau = 0.5;
  bool disable_temporal = false;
  bool disable_rrc = false;
  int threads = 0;  // 0 = env SPLATSEG_THREADS, then hardware
  TraceConfig trace;

  void validate() const;
};

struct PipelineResult {
  int gaussian_count = 0;
  int timestamp_count = 0;
  int label_count = 0;  // K+1
  int segment_count = 0;
  int temporal_iterations = 0;
  bool temporal_converged = false;
  int total_sweeps = 0;
  int rrc_iterations = 0;
  bool rrc_converged = false;
  std::map<std::string, double> stage_seconds;
  double total_seconds = 0.0;
};

// Full segmentation run: load, temporal instance tracing (or single-segment
// tracing when disabled), range-control refinement (unless disabled),
// per-frame segmented renders, and artifact writes (segments.json,
// pointclouds/seg_{s}.ply, ranges.g4dr, masks/{t}.pgm, rgb/{t}.ppm,
// manifest.json). Every artifact except manifest.json is byte-deterministic
// for a fixed config, independent of thread count.
PipelineResult run_segment_pipeline(const PipelineConfig& config);

}  // namespace splatseg

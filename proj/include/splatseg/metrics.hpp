// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splatseg/image.hpp"

namespace splatseg {

// Binary masks: nonzero is foreground. Two empty masks score 1.
double frame_iou(const Image<std::uint8_t>& a, const Image<std::uint8_t>& b);
double frame_acc(const Image<std::uint8_t>& a, const Image<std::uint8_t>& b);

struct EvalFrame {
  int timestamp = 0;
  Image<std::uint8_t> pred;
  Image<std::uint8_t> gt;
};

struct FrameMetric {
  int timestamp = 0;
  double iou = 0.0;
  double acc = 0.0;
};

struct MetricsReport {
  std::vector<FrameMetric> per_frame;
  double miou = 0.0;
  double macc = 0.0;
};

MetricsReport evaluate_run(std::span<const EvalFrame> frames);

// "timestamp,iou,acc" header, one row per frame, then a "mean" row.
void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path);
MetricsReport read_metrics_csv(const std::filesystem::path& path);

// Directory evaluation: pred_dir holds rendered {t}.pgm masks (nonzero =
// foreground), gt_dir labeled or binary PGMs matched by numeric stem.
// target > 0 binarizes gt as label == target, else nonzero. Every pred
// frame must have a gt frame and vice versa.
MetricsReport evaluate_dirs(const std::filesystem::path& pred_dir,
                            const std::filesystem::path& gt_dir, int target);

}  // namespace splatseg

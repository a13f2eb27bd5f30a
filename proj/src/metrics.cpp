// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "splatseg/scene_io.hpp"
#include "splatseg/types.hpp"

namespace splatseg {

namespace {

void check_pair(const Image<std::uint8_t>& a, const Image<std::uint8_t>& b) {
  if (!a.same_shape(b))
    throw ValidationError("mask shapes differ");
  if (a.width <= 0 || a.height <= 0)
    throw ValidationError("masks must be non-empty");
  if (a.channels != 1)
    throw ValidationError("masks must be single-channel");
}

}  // namespace

double frame_iou(const Image<std::uint8_t>& a, const Image<std::uint8_t>& b) {
  check_pair(a, b);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool in_a = a.data[i] != 0;
    const bool in_b = b.data[i] != 0;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double frame_acc(const Image<std::uint8_t>& a, const Image<std::uint8_t>& b) {
  check_pair(a, b);
  std::size_t match = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    match += (a.data[i] != 0) == (b.data[i] != 0);
  return static_cast<double>(match) / static_cast<double>(a.data.size());
}

MetricsReport evaluate_run(std::span<const EvalFrame> frames) {
  if (frames.empty())
    throw ValidationError("cannot evaluate an empty frame set");
  MetricsReport report;
  report.per_frame.reserve(frames.size());
  for (const EvalFrame& f : frames) {
    FrameMetric m;
    m.timestamp = f.timestamp;
    m.iou = frame_iou(f.pred, f.gt);
    m.acc = frame_acc(f.pred, f.gt);
    report.per_frame.push_back(m);
    report.miou += m.iou;
    report.macc += m.acc;
  }
  report.miou /= static_cast<double>(frames.size());
  report.macc /= static_cast<double>(frames.size());
  return report;
}

void write_metrics_csv(const MetricsReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "timestamp,iou,acc\n";
  char line[96];
  for (const FrameMetric& m : report.per_frame) {
    std::snprintf(line, sizeof(line), "%d,%.9f,%.9f\n", m.timestamp, m.iou,
                  m.acc);
    out << line;
  }
  std::snprintf(line, sizeof(line), "mean,%.9f,%.9f\n", report.miou,
                report.macc);
  out << line;
  if (!out) throw FormatError("failed writing " + path.string());
}

MetricsReport read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "timestamp,iou,acc")
    throw FormatError("unexpected metrics header in " + path.string());
  MetricsReport report;
  bool saw_mean = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string stamp, iou, acc;
    if (!std::getline(row, stamp, ',') || !std::getline(row, iou, ',') ||
        !std::getline(row, acc))
      throw FormatError("malformed metrics row: " + line);
    if (stamp == "mean") {
      report.miou = std::stod(iou);
      report.macc = std::stod(acc);
      saw_mean = true;
    } else {
      if (saw_mean) throw FormatError("rows after the mean row");
      FrameMetric m;
      m.timestamp = std::stoi(stamp);
      m.iou = std::stod(iou);
      m.acc = std::stod(acc);
      report.per_frame.push_back(m);
    }
  }
  if (!saw_mean) throw FormatError("metrics file is missing the mean row");
  return report;
}

MetricsReport evaluate_dirs(const std::filesystem::path& pred_dir,
                            const std::filesystem::path& gt_dir, int target) {
  auto collect = [](const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
      throw ValidationError(dir.string() + " is not a directory");
    std::map<int, std::filesystem::path> by_stamp;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".pgm")
        continue;
      const std::string stem = entry.path().stem().string();
      if (stem.empty() ||
          !std::all_of(stem.begin(), stem.end(),
                       [](unsigned char c) { return std::isdigit(c); }))
        continue;
      by_stamp[std::stoi(stem)] = entry.path();
    }
    return by_stamp;
  };

  const auto pred = collect(pred_dir);
  const auto gt = collect(gt_dir);

  auto missing_from = [](const std::map<int, std::filesystem::path>& have,
                         const std::map<int, std::filesystem::path>& want) {
    std::string stamps;
    for (const auto& [t, p] : want)
      if (!have.count(t)) stamps += (stamps.empty() ? "" : ", ") +
                                    std::to_string(t);
    return stamps;
  };
  if (const std::string s = missing_from(gt, pred); !s.empty())
    throw ValidationError("frames missing from " + gt_dir.string() + ": " + s);
  if (const std::string s = missing_from(pred, gt); !s.empty())
    throw ValidationError("frames missing from " + pred_dir.string() + ": " +
                          s);
  if (pred.empty())
    throw ValidationError("no frames found under " + pred_dir.string());

  std::vector<EvalFrame> frames;
  frames.reserve(pred.size());
  for (const auto& [t, pred_path] : pred) {
    const Image<std::uint16_t> p = load_mask(pred_path);
    const Image<std::uint16_t> g = load_mask(gt.at(t));
    EvalFrame frame;
    frame.timestamp = t;
    frame.pred = Image<std::uint8_t>(p.width, p.height);
    frame.gt = Image<std::uint8_t>(g.width, g.height);
    for (std::size_t i = 0; i < p.data.size(); ++i)
      frame.pred.data[i] = p.data[i] != 0 ? 1 : 0;
    for (std::size_t i = 0; i < g.data.size(); ++i)
      frame.gt.data[i] =
          (target > 0 ? g.data[i] == target : g.data[i] != 0) ? 1 : 0;
    frames.push_back(std::move(frame));
  }
  return evaluate_run(frames);
}

}  // namespace splatseg

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "splatseg/igit.hpp"
#include "splatseg/parallel.hpp"
#include "splatseg/rrc.hpp"
#include "splatseg/scene_io.hpp"
#include "splatseg/temporal.hpp"

namespace splatseg {

void PipelineConfig::validate() const {
  if (scene_path.empty() || cameras_path.empty() || masks_dir.empty() ||
      output_dir.empty())
    throw ValidationError("scene, cameras, masks, and output paths are all "
                          "required");
  if (target_id < 1) throw ValidationError("target id must be positive");
  if (igit_max_iters < 1 || rrc_max_iters < 1)
    throw ValidationError("iteration limits must be positive");
  if (tau < 0.0 || tau > 1.0) throw ValidationError("tau must lie in [0,1]");
  if (threads < 0) throw ValidationError("threads must be non-negative");
}

namespace {

std::string frame_name(int value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", value);
  return buf;
}

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& stages)
      : stages_(stages) {}

  template <class Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      stages_[name] += seconds_since(start);
    } else {
      auto value = fn();
      stages_[name] += seconds_since(start);
      return value;
    }
  }

  static double seconds_since(
      std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }

 private:
  std::map<std::string, double>& stages_;
};

}  // namespace

PipelineResult run_segment_pipeline(const PipelineConfig& config) {
  config.validate();
  if (config.threads > 0) set_thread_count(config.threads);
  const auto total_start = std::chrono::steady_clock::now();

  PipelineResult result;
  StageTimer timer(result.stage_seconds);

  struct Inputs {
    DynamicScene scene{1, 1};
    std::vector<CameraView> cameras;
    std::vector<InstanceMask> masks;
    std::vector<ViewRef> views;
    int label_count = 0;
  };
  Inputs in = timer.run("load", [&] {
    Inputs loaded;
    loaded.scene = load_scene(config.scene_path);
    loaded.cameras = load_cameras(config.cameras_path);
    if (loaded.cameras.empty())
      throw ValidationError("at least one camera is required");
    loaded.masks.reserve(loaded.cameras.size());
    for (std::size_t v = 0; v < loaded.cameras.size(); ++v) {
      InstanceMask mask;
      mask.labels =
          load_mask(config.masks_dir / (frame_name(static_cast<int>(v)) +
                                        ".pgm"));
      mask.timestamp = loaded.cameras[v].timestamp;
      loaded.masks.push_back(std::move(mask));
    }
    loaded.label_count = max_label(loaded.masks) + 1;
    validate_target(config.target_id, loaded.masks);
    loaded.views.reserve(loaded.cameras.size());
    for (std::size_t v = 0; v < loaded.cameras.size(); ++v)
      loaded.views.push_back({&loaded.cameras[v], &loaded.masks[v],
                              static_cast<int>(v)});
    return loaded;
  });

  result.gaussian_count = in.scene.gaussian_count();
  result.timestamp_count = in.scene.timestamp_count();
  result.label_count = in.label_count;

  TemporalSegments segments = timer.run("igit", [&] {
    if (config.disable_temporal) {
      const IgitResult igit =
          igit_run(in.scene, in.views, in.label_count, config.target_id,
                   config.igit_max_iters, config.trace);
      result.temporal_iterations = igit.iterations;
      result.temporal_converged = igit.converged;
      result.total_sweeps = igit.iterations;
      TemporalSegments single;
      single.starts = {0};
      single.masks = {igit.mask};
      single.total_timestamps = in.scene.timestamp_count();
      return single;
    }
    TemporalResult temporal =
        temporal_igit_run(in.scene, in.views, in.label_count,
                          config.target_id, config.igit_max_iters, config.tau,
                          config.trace);
    result.temporal_iterations = temporal.iterations;
    result.temporal_converged = temporal.converged;
    result.total_sweeps = temporal.total_sweeps;
    return temporal.segments;
  });
  result.segment_count = static_cast<int>(segments.size());

  RangeThresholds thresholds;
  if (!config.disable_rrc) {
    timer.run("rrc", [&] {
      RrcResult rrc =
          rrc_run(in.scene, in.views, segments, in.label_count,
                  config.target_id, config.rrc_max_iters, config.trace);
      thresholds = std::move(rrc.thresholds);
      result.rrc_iterations = rrc.iterations;
      result.rrc_converged = rrc.converged;
    });
  }

  struct FrameRender {
    int timestamp = 0;
    RenderOutput output;
  };
  const std::vector<FrameRender> renders = timer.run("render", [&] {
    std::vector<FrameRender> frames;
    std::vector<std::uint8_t> seen(
        static_cast<std::size_t>(in.scene.timestamp_count()), 0);
    for (const CameraView& cam : in.cameras) {
      if (seen[cam.timestamp]) continue;
      seen[cam.timestamp] = 1;
      FrameRender frame;
      frame.timestamp = cam.timestamp;
      frame.output = render_segmented(
          in.scene, cam, segments,
          config.disable_rrc ? nullptr : &thresholds, config.trace);
      frames.push_back(std::move(frame));
    }
    return frames;
  });

  timer.run("write", [&] {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir / "masks");
    fs::create_directories(config.output_dir / "rgb");
    fs::create_directories(config.output_dir / "pointclouds");

    for (const FrameRender& frame : renders) {
      const std::string stem = frame_name(frame.timestamp);
      save_mask(binarize_alpha(frame.output.alpha),
                config.output_dir / "masks" / (stem + ".pgm"));
      save_ppm(frame.output.rgb,
               config.output_dir / "rgb" / (stem + ".ppm"));
    }

    save_segments(segments, in.scene.gaussian_count(),
                  config.output_dir / "segments.json");
    for (std::size_t s = 0; s < segments.size(); ++s) {
      std::vector<std::uint8_t> selection = segments.masks[s].member;
      if (selection.empty())
        selection.assign(
            static_cast<std::size_t>(in.scene.gaussian_count()), 0);
      save_pointcloud(in.scene, selection, segments.starts[s],
                      config.output_dir / "pointclouds" /
                          ("seg_" + std::to_string(s) + ".ply"));
    }
    if (!config.disable_rrc)
      save_ranges(thresholds, config.output_dir / "ranges.g4dr");
  });

  result.total_seconds = StageTimer::seconds_since(total_start);

  nlohmann::json manifest;
  manifest["gaussian_count"] = result.gaussian_count;
  manifest["timestamp_count"] = result.timestamp_count;
  manifest["label_count"] = result.label_count;
  manifest["segment_count"] = result.segment_count;
  manifest["temporal_iterations"] = result.temporal_iterations;
  manifest["temporal_converged"] = result.temporal_converged;
  manifest["total_sweeps"] = result.total_sweeps;
  manifest["rrc_iterations"] = result.rrc_iterations;
  manifest["rrc_converged"] = result.rrc_converged;
  manifest["threads"] = thread_count();
  manifest["total_seconds"] = result.total_seconds;
  for (const auto& [name, seconds] : result.stage_seconds)
    manifest["stage_seconds"][name] = seconds;
  std::ofstream out(config.output_dir / "manifest.json");
  if (!out)
    throw FormatError("cannot write the manifest under " +
                      config.output_dir.string());
  out << manifest.dump(2) << '\n';

  return result;
}

}  // namespace splatseg

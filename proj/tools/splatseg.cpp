// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "splatseg/igit.hpp"
#include "splatseg/metrics.hpp"
#include "splatseg/parallel.hpp"
#include "splatseg/pipeline.hpp"
#include "splatseg/rrc.hpp"
#include "splatseg/scene_io.hpp"
#include "splatseg/synth.hpp"
#include "splatseg/temporal.hpp"

namespace {

namespace fs = std::filesystem;

std::string frame_name(int value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", value);
  return buf;
}

int run_synth(const std::string& scenario, const fs::path& out,
              const splatseg::SynthSpec& base) {
  splatseg::SynthSpec spec = base;
  spec.scenario = splatseg::scenario_from_name(scenario);
  const splatseg::SynthDataset dataset = splatseg::generate(spec);
  splatseg::write_dataset(dataset, out);
  std::printf("wrote %s: %d gaussians, %d frames, %zu views\n",
              out.string().c_str(), dataset.scene.gaussian_count(),
              dataset.scene.timestamp_count(), dataset.cameras.size());
  return 0;
}

int run_segment(const splatseg::PipelineConfig& config) {
  const splatseg::PipelineResult result =
      splatseg::run_segment_pipeline(config);
  std::printf("scene: %d gaussians, %d frames, %d labels\n",
              result.gaussian_count, result.timestamp_count,
              result.label_count);
  std::printf("segments: %d (iterations %d, sweeps %d, converged %s)\n",
              result.segment_count, result.temporal_iterations,
              result.total_sweeps, result.temporal_converged ? "yes" : "no");
  std::printf("range control: %d iterations, converged %s\n",
              result.rrc_iterations, result.rrc_converged ? "yes" : "no");
  for (const auto& [stage, seconds] : result.stage_seconds)
    std::printf("  %-6s %8.3fs\n", stage.c_str(), seconds);
  std::printf("total %.3fs\n", result.total_seconds);
  return 0;
}

int run_render(const fs::path& scene_path, const fs::path& cameras_path,
               const fs::path& out, const fs::path& segments_path,
               const fs::path& ranges_path) {
  const splatseg::DynamicScene scene = splatseg::load_scene(scene_path);
  const std::vector<splatseg::CameraView> cameras =
      splatseg::load_cameras(cameras_path);

  splatseg::TemporalSegments segments;
  splatseg::RangeThresholds thresholds;
  const bool segmented = !segments_path.empty();
  if (!segments_path.empty())
    segments = splatseg::load_segments(segments_path);
  if (!ranges_path.empty()) {
    if (!segmented)
      throw splatseg::ValidationError(
          "--ranges requires --segments to pick the rendered members");
    thresholds = splatseg::load_ranges(ranges_path);
  }

  fs::create_directories(out / "rgb");
  fs::create_directories(out / "masks");
  const splatseg::TraceConfig cfg;
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    splatseg::RenderOutput output;
    if (segmented) {
      output = splatseg::render_segmented(
          scene, cameras[v], segments,
          ranges_path.empty() ? nullptr : &thresholds, cfg);
    } else {
      output = splatseg::render_view(scene, cameras[v], cfg);
    }
    const std::string stem = frame_name(static_cast<int>(v));
    splatseg::save_ppm(output.rgb, out / "rgb" / (stem + ".ppm"));
    splatseg::save_mask(splatseg::binarize_alpha(output.alpha),
                        out / "masks" / (stem + ".pgm"));
  }
  std::printf("rendered %zu views into %s\n", cameras.size(),
              out.string().c_str());
  return 0;
}

int run_trace(const fs::path& scene_path, const fs::path& cameras_path,
              const fs::path& masks_dir, const fs::path& out,
              bool no_occlusion) {
  const splatseg::DynamicScene scene = splatseg::load_scene(scene_path);
  const std::vector<splatseg::CameraView> cameras =
      splatseg::load_cameras(cameras_path);
  if (cameras.empty())
    throw splatseg::ValidationError("at least one camera is required");

  std::vector<splatseg::InstanceMask> masks;
  masks.reserve(cameras.size());
  for (std::size_t v = 0; v < cameras.size(); ++v) {
    splatseg::InstanceMask mask;
    mask.labels = splatseg::load_mask(
        masks_dir / (frame_name(static_cast<int>(v)) + ".pgm"));
    mask.timestamp = cameras[v].timestamp;
    masks.push_back(std::move(mask));
  }
  const int label_count = splatseg::max_label(masks) + 1;

  std::vector<splatseg::ViewRef> views;
  views.reserve(cameras.size());
  for (std::size_t v = 0; v < cameras.size(); ++v)
    views.push_back({&cameras[v], &masks[v], static_cast<int>(v)});

  splatseg::TraceConfig cfg;
  cfg.use_occlusion = !no_occlusion;
  const splatseg::WeightMatrix weights =
      splatseg::accumulate_segment(scene, views, label_count, cfg);
  const splatseg::ProbabilityMatrix probabilities =
      splatseg::normalize(weights);

  std::ofstream csv(out);
  if (!csv)
    throw splatseg::FormatError("cannot open " + out.string() +
                                " for writing");
  csv << "gaussian,label,weight,probability\n";
  char line[128];
  for (std::size_t i = 0; i < weights.rows(); ++i)
    for (const auto& [label, weight] : weights.row(i)) {
      std::snprintf(line, sizeof(line), "%zu,%u,%.9g,%.9g\n", i,
                    static_cast<unsigned>(label), weight,
                    probabilities.value(i, label));
      csv << line;
    }
  std::printf("traced %zu views, %d labels, wrote %s\n", views.size(),
              label_count, out.string().c_str());
  return 0;
}

int run_eval(const fs::path& pred, const fs::path& gt, int target,
             const fs::path& out) {
  const splatseg::MetricsReport report =
      splatseg::evaluate_dirs(pred, gt, target);
  if (!out.empty()) splatseg::write_metrics_csv(report, out);
  std::printf("frames %zu  miou %.6f  macc %.6f\n", report.per_frame.size(),
              report.miou, report.macc);
  return 0;
}

void apply_config_file(const fs::path& path,
                       splatseg::PipelineConfig& config) {
  std::ifstream in(path);
  if (!in)
    throw splatseg::FormatError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw splatseg::FormatError("malformed config " + path.string() + ": " +
                                e.what());
  }
  if (doc.contains("scene")) config.scene_path = doc["scene"].get<std::string>();
  if (doc.contains("cameras"))
    config.cameras_path = doc["cameras"].get<std::string>();
  if (doc.contains("masks")) config.masks_dir = doc["masks"].get<std::string>();
  if (doc.contains("out")) config.output_dir = doc["out"].get<std::string>();
  if (doc.contains("target")) config.target_id = doc["target"].get<int>();
  if (doc.contains("igit_iters"))
    config.igit_max_iters = doc["igit_iters"].get<int>();
  if (doc.contains("rrc_iters"))
    config.rrc_max_iters = doc["rrc_iters"].get<int>();
  if (doc.contains("tau")) config.tau = doc["tau"].get<double>();
  if (doc.contains("no_temporal"))
    config.disable_temporal = doc["no_temporal"].get<bool>();
  if (doc.contains("no_rrc")) config.disable_rrc = doc["no_rrc"].get<bool>();
  if (doc.contains("threads")) config.threads = doc["threads"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-free segmentation of dynamic Gaussian scenes"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  std::string synth_scenario;
  std::string synth_out;
  splatseg::SynthSpec synth_spec;
  int synth_seed = 1;
  synth->add_option("--scenario", synth_scenario,
                    "static_two_objects, occluder, identity_flip, or "
                    "boundary_stress")
      ->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--gaussians", synth_spec.gaussians_per_object,
                    "Gaussians per object");
  synth->add_option("--frames", synth_spec.frames, "Timestamps");
  synth->add_option("--views-per-frame", synth_spec.views_per_frame,
                    "Cameras per timestamp");
  synth->add_option("--width", synth_spec.width, "Image width");
  synth->add_option("--height", synth_spec.height, "Image height");
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_flag("--mask-noise", synth_spec.mask_noise,
                  "Dilate or erode each mask by one pixel");

  // segment
  auto* segment = app.add_subcommand("segment", "Run the segmentation "
                                                "pipeline");
  splatseg::PipelineConfig pipeline;
  std::string seg_config, seg_scene, seg_cameras, seg_masks, seg_out;
  segment->add_option("--config", seg_config, "JSON config file");
  segment->add_option("--scene", seg_scene, "Scene .g4ds file");
  segment->add_option("--cameras", seg_cameras, "Cameras .json file");
  segment->add_option("--masks", seg_masks, "Instance mask directory");
  segment->add_option("--out", seg_out, "Output directory");
  auto* seg_target =
      segment->add_option("--target", pipeline.target_id, "Instance id");
  auto* seg_igit = segment->add_option("--igit-iters",
                                       pipeline.igit_max_iters,
                                       "Tracing iteration cap");
  auto* seg_rrc = segment->add_option("--rrc-iters", pipeline.rrc_max_iters,
                                      "Range refinement iteration cap");
  auto* seg_tau = segment->add_option("--tau", pipeline.tau,
                                      "Segment merge threshold");
  auto* seg_no_temporal =
      segment->add_flag("--no-temporal", "Single segment, no merging");
  auto* seg_no_rrc =
      segment->add_flag("--no-rrc", "Skip range refinement");
  auto* seg_threads =
      segment->add_option("--threads", pipeline.threads, "Worker threads");

  // render
  auto* render = app.add_subcommand("render", "Render every camera");
  std::string ren_scene, ren_cameras, ren_out, ren_segments, ren_ranges;
  render->add_option("--scene", ren_scene, "Scene .g4ds file")->required();
  render->add_option("--cameras", ren_cameras, "Cameras .json file")
      ->required();
  render->add_option("--out", ren_out, "Output directory")->required();
  render->add_option("--segments", ren_segments,
                     "segments.json restricting the render");
  render->add_option("--ranges", ren_ranges, "ranges.g4dr thresholds");
  int ren_threads = 0;
  render->add_option("--threads", ren_threads, "Worker threads");

  // trace
  auto* trace = app.add_subcommand("trace", "One weight accumulation pass "
                                            "over all views");
  std::string tr_scene, tr_cameras, tr_masks, tr_out;
  bool tr_no_occlusion = false;
  trace->add_option("--scene", tr_scene, "Scene .g4ds file")->required();
  trace->add_option("--cameras", tr_cameras, "Cameras .json file")
      ->required();
  trace->add_option("--masks", tr_masks, "Instance mask directory")
      ->required();
  trace->add_option("--out", tr_out, "Output CSV")->required();
  trace->add_flag("--no-occlusion", tr_no_occlusion,
                  "Accumulate without transmittance");
  int tr_threads = 0;
  trace->add_option("--threads", tr_threads, "Worker threads");

  // eval
  auto* eval = app.add_subcommand("eval", "Compare rendered masks against "
                                          "ground truth");
  std::string ev_pred, ev_gt, ev_out;
  int ev_target = 0;
  eval->add_option("--pred", ev_pred, "Predicted mask directory")->required();
  eval->add_option("--gt", ev_gt, "Ground-truth mask directory")->required();
  eval->add_option("--target", ev_target,
                   "Ground-truth label treated as foreground (0 = any)");
  eval->add_option("--out", ev_out, "Metrics CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      synth_spec.seed = static_cast<std::uint64_t>(synth_seed);
      return run_synth(synth_scenario, synth_out, synth_spec);
    }
    if (segment->parsed()) {
      if (!seg_config.empty()) {
        // Flags override file values, so stash them before the file load.
        const splatseg::PipelineConfig flags = pipeline;
        apply_config_file(seg_config, pipeline);
        if (seg_target->count()) pipeline.target_id = flags.target_id;
        if (seg_igit->count()) pipeline.igit_max_iters = flags.igit_max_iters;
        if (seg_rrc->count()) pipeline.rrc_max_iters = flags.rrc_max_iters;
        if (seg_tau->count()) pipeline.tau = flags.tau;
        if (seg_threads->count()) pipeline.threads = flags.threads;
      }
      if (!seg_scene.empty()) pipeline.scene_path = seg_scene;
      if (!seg_cameras.empty()) pipeline.cameras_path = seg_cameras;
      if (!seg_masks.empty()) pipeline.masks_dir = seg_masks;
      if (!seg_out.empty()) pipeline.output_dir = seg_out;
      if (seg_no_temporal->count()) pipeline.disable_temporal = true;
      if (seg_no_rrc->count()) pipeline.disable_rrc = true;
      return run_segment(pipeline);
    }
    if (render->parsed()) {
      if (ren_threads > 0) splatseg::set_thread_count(ren_threads);
      return run_render(ren_scene, ren_cameras, ren_out, ren_segments,
                        ren_ranges);
    }
    if (trace->parsed()) {
      if (tr_threads > 0) splatseg::set_thread_count(tr_threads);
      return run_trace(tr_scene, tr_cameras, tr_masks, tr_out,
                       tr_no_occlusion);
    }
    if (eval->parsed()) return run_eval(ev_pred, ev_gt, ev_target, ev_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "splatseg/types.hpp"

namespace splatseg {

enum class Scenario {
  // Two separated static blobs; a stable scene that should collapse to a
  // single temporal segment.
  kStaticTwoObjects,
  // A thin frontal object, an opaque aperture wall behind it, and large
  // hidden "lurker" Gaussians further back whose only visible weight shines
  // through the object. Single-pass extraction picks the lurkers up;
  // re-tracing without the wall's occlusion drops them.
  kOccluder,
  // Two slowly spinning blobs; the bigger one carries the target identity
  // only in the second half of the sequence.
  kIdentityFlip,
  // A ball in front of an opaque backdrop plus oversized low-opacity
  // Gaussian stacks straddling the silhouette; range control has to truncate
  // their spill.
  kBoundaryStress,
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct SynthSpec {
  Scenario scenario = Scenario::kStaticTwoObjects;
  int gaussians_per_object = 600;
  int frames = 8;
  int views_per_frame = 2;
  int width = 192;
  int height = 192;
  std::uint64_t seed = 1;
  // Randomly dilates or erodes each mask's foreground by one pixel.
  bool mask_noise = false;
};

struct SynthDataset {
  DynamicScene scene;
  std::vector<CameraView> cameras;
  // Pipeline inputs, aligned with cameras (noisy when requested).
  std::vector<InstanceMask> masks;
  // gt_assignment[t][i] is the instance id of Gaussian i at frame t.
  std::vector<std::vector<std::uint16_t>> gt_assignment;
  // Clean dominant-contribution masks, aligned with cameras.
  std::vector<InstanceMask> gt_masks;
  // gt_masks trimmed to the visible surface (accumulated alpha > 0.5);
  // the evaluation reference, comparable with binarized renders.
  std::vector<InstanceMask> surface_masks;
};

SynthDataset generate(const SynthSpec& spec);

// Renders instance masks from the ground-truth assignment: each pixel takes
// the instance of the Gaussian with the largest o*g*T contribution there;
// pixels nothing touches stay background.
std::vector<InstanceMask> perfect_masks_from_gt(
    const DynamicScene& scene, std::span<const CameraView> cameras,
    const std::vector<std::vector<std::uint16_t>>& gt_assignment);

// Same labeling, but pixels whose accumulated alpha stays at or below 0.5
// become background. Instance labels fade out well past the surface a
// binarized render shows, so evaluation compares against this trim.
std::vector<InstanceMask> surface_masks_from_gt(
    const DynamicScene& scene, std::span<const CameraView> cameras,
    const std::vector<std::vector<std::uint16_t>>& gt_assignment);

// Writes scene.g4ds, cameras.json, masks/, gt_masks/, gt_frames/ (surface
// masks, first view per timestamp, for evaluation), and gt_assignment.g4da
// under dir.
void write_dataset(const SynthDataset& dataset,
                   const std::filesystem::path& dir);

// "G4DA" magic, u32 N, u32 T, then T blocks of N u16 instance ids.
void save_assignment(const std::vector<std::vector<std::uint16_t>>& assignment,
                     const std::filesystem::path& path);
std::vector<std::vector<std::uint16_t>> load_assignment(
    const std::filesystem::path& path);

}  // namespace splatseg

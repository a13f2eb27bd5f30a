// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splatseg/types.hpp"

namespace splatseg {

// Scene container: "G4DS" magic, u32 version (=1), u32 N, u32 T, then T
// frame blocks of N * (3 mean, 4 quat wxyz, 3 scale, 1 opacity, 3 rgb)
// little-endian f32.
DynamicScene load_scene(const std::filesystem::path& path);
void save_scene(const DynamicScene& scene, const std::filesystem::path& path);

// Masks are 16-bit binary PGM (P5, maxval 65535, big-endian samples).
// The caller assigns the timestamp; PGM carries none.
Image<std::uint16_t> load_mask(const std::filesystem::path& path);
void save_mask(const Image<std::uint16_t>& labels,
               const std::filesystem::path& path);

// Cameras are a JSON array of
// {fx,fy,cx,cy,width,height,world_to_camera:[16 row-major],timestamp}.
std::vector<CameraView> load_cameras(const std::filesystem::path& path);
void save_cameras(std::span<const CameraView> cameras,
                  const std::filesystem::path& path);

// ASCII PLY of the selected Gaussians' means and colors at frame t.
void save_pointcloud(const DynamicScene& scene,
                     std::span<const std::uint8_t> selection, int t,
                     const std::filesystem::path& path);

// 8-bit binary PPM (P6, maxval 255); rgb must be a 3-channel float image
// with values clamped to [0,1] on write.
void save_ppm(const Image<float>& rgb, const std::filesystem::path& path);

}  // namespace splatseg

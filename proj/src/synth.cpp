// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "splatseg/parallel.hpp"
#include "splatseg/projection.hpp"
#include "splatseg/rasterizer.hpp"
#include "splatseg/scene_io.hpp"

namespace splatseg {

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kStaticTwoObjects:
      return "static_two_objects";
    case Scenario::kOccluder:
      return "occluder";
    case Scenario::kIdentityFlip:
      return "identity_flip";
    case Scenario::kBoundaryStress:
      return "boundary_stress";
  }
  throw ValidationError("unknown scenario");
}

Scenario scenario_from_name(const std::string& name) {
  for (Scenario s :
       {Scenario::kStaticTwoObjects, Scenario::kOccluder,
        Scenario::kIdentityFlip, Scenario::kBoundaryStress})
    if (name == scenario_name(s)) return s;
  throw ValidationError("unknown scenario: " + name);
}

namespace {

using Rng = std::mt19937_64;

float uniform(Rng& rng, float lo, float hi) {
  return std::uniform_real_distribution<float>(lo, hi)(rng);
}

Eigen::Vector3f uniform_in_ball(Rng& rng, float radius) {
  for (;;) {
    const Eigen::Vector3f p(uniform(rng, -1.0f, 1.0f),
                            uniform(rng, -1.0f, 1.0f),
                            uniform(rng, -1.0f, 1.0f));
    if (p.squaredNorm() <= 1.0f) return p * radius;
  }
}

Eigen::Quaternionf random_rotation(Rng& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  for (;;) {
    Eigen::Quaternionf q(n(rng), n(rng), n(rng), n(rng));
    const float norm = q.norm();
    if (norm > 1e-3f) {
      q.coeffs() /= norm;
      return q;
    }
  }
}

Eigen::Vector3f jitter_color(Rng& rng, const Eigen::Vector3f& base,
                             float amount) {
  Eigen::Vector3f c;
  for (int k = 0; k < 3; ++k)
    c[k] = std::clamp(base[k] + uniform(rng, -amount, amount), 0.0f, 1.0f);
  return c;
}

struct Proto {
  Eigen::Vector3f pos;         // at t = 0, world frame
  Eigen::Quaternionf rot;
  Eigen::Vector3f scale;
  float opacity = 1.0f;
  Eigen::Vector3f color;
  std::uint16_t base_id = 0;   // instance id before any identity change
  int object = 0;              // motion group
};

// A roughly solid ball of overlapping Gaussians.
void add_ball(std::vector<Proto>& protos, Rng& rng,
              const Eigen::Vector3f& center, float radius, int count,
              float opacity_lo, float opacity_hi,
              const Eigen::Vector3f& color, std::uint16_t id, int object) {
  const float spacing = radius * std::cbrt(4.0f * float(M_PI) / 3.0f /
                                           static_cast<float>(count));
  const float sigma = 0.9f * spacing;
  for (int k = 0; k < count; ++k) {
    Proto p;
    p.pos = center + uniform_in_ball(rng, radius);
    p.rot = random_rotation(rng);
    p.scale = Eigen::Vector3f(sigma * uniform(rng, 0.8f, 1.2f),
                              sigma * uniform(rng, 0.8f, 1.2f),
                              sigma * uniform(rng, 0.8f, 1.2f));
    p.opacity = uniform(rng, opacity_lo, opacity_hi);
    p.color = jitter_color(rng, color, 0.08f);
    p.base_id = id;
    p.object = object;
    protos.push_back(p);
  }
}

// An axis-aligned planar grid at depth z covering [-half, half]^2.
void add_wall(std::vector<Proto>& protos, Rng& rng, float z, float half,
              float spacing, float sigma, float opacity_lo, float opacity_hi,
              const Eigen::Vector3f& color, std::uint16_t id, int object) {
  const int steps = static_cast<int>(std::floor(half / spacing));
  for (int iy = -steps; iy <= steps; ++iy) {
    for (int ix = -steps; ix <= steps; ++ix) {
      Proto p;
      p.pos = Eigen::Vector3f(static_cast<float>(ix) * spacing,
                              static_cast<float>(iy) * spacing,
                              z + uniform(rng, -0.01f, 0.01f));
      p.rot = Eigen::Quaternionf::Identity();
      p.scale = Eigen::Vector3f(sigma, sigma, 0.01f);
      p.opacity = uniform(rng, opacity_lo, opacity_hi);
      p.color = jitter_color(rng, color, 0.05f);
      p.base_id = id;
      p.object = object;
      protos.push_back(p);
    }
  }
}

// A thin frontal disc of small Gaussians in the z = z0 plane.
void add_disc(std::vector<Proto>& protos, Rng& rng, float z0, float radius,
              int count, float opacity_lo, float opacity_hi,
              const Eigen::Vector3f& color, std::uint16_t id, int object) {
  const float spacing =
      std::sqrt(float(M_PI) * radius * radius / static_cast<float>(count));
  const float sigma = 0.5f * spacing;
  for (int k = 0; k < count; ++k) {
    float x, y;
    do {
      x = uniform(rng, -radius, radius);
      y = uniform(rng, -radius, radius);
    } while (x * x + y * y > radius * radius);
    Proto p;
    p.pos = Eigen::Vector3f(x, y, z0 + uniform(rng, -0.02f, 0.02f));
    p.rot = Eigen::Quaternionf::Identity();
    p.scale = Eigen::Vector3f(sigma * uniform(rng, 0.9f, 1.1f),
                              sigma * uniform(rng, 0.9f, 1.1f), 0.01f);
    p.opacity = uniform(rng, opacity_lo, opacity_hi);
    p.color = jitter_color(rng, color, 0.08f);
    p.base_id = id;
    p.object = object;
    protos.push_back(p);
  }
}

CameraView look_at_camera(const Eigen::Vector3f& pos, int width, int height,
                          int timestamp) {
  const Eigen::Vector3f target = Eigen::Vector3f::Zero();
  const Eigen::Vector3f forward = (target - pos).normalized();
  Eigen::Vector3f up(0.0f, 1.0f, 0.0f);
  if (std::abs(up.dot(forward)) > 0.99f) up = Eigen::Vector3f(0.0f, 0.0f, 1.0f);
  const Eigen::Vector3f right = up.cross(forward).normalized();
  const Eigen::Vector3f down = forward.cross(right);

  CameraView cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.866f * static_cast<float>(width);
  cam.cx = 0.5f * static_cast<float>(width);
  cam.cy = 0.5f * static_cast<float>(height);
  cam.timestamp = timestamp;
  Eigen::Matrix3f rot;
  rot.row(0) = right;
  rot.row(1) = down;
  rot.row(2) = forward;
  cam.world_to_camera.setIdentity();
  cam.world_to_camera.block<3, 3>(0, 0) = rot;
  cam.world_to_camera.block<3, 1>(0, 3) = -rot * pos;
  return cam;
}

Eigen::Vector3f orbit_position(float radius, float azimuth_deg,
                               float elevation_deg) {
  const float az = azimuth_deg * float(M_PI) / 180.0f;
  const float el = elevation_deg * float(M_PI) / 180.0f;
  return radius * Eigen::Vector3f(std::sin(az) * std::cos(el), std::sin(el),
                                  -std::cos(az) * std::cos(el));
}

struct ScenarioLayout {
  std::vector<Proto> protos;
  float cam_azimuth = 10.0f;    // +- spread, degrees
  float cam_elevation = 4.0f;
  bool spin = false;            // identity flip: objects rotate slowly
};

ScenarioLayout build_layout(const SynthSpec& spec, Rng& rng) {
  const int n = spec.gaussians_per_object;
  ScenarioLayout out;
  switch (spec.scenario) {
    case Scenario::kStaticTwoObjects: {
      add_ball(out.protos, rng, {-0.9f, 0.0f, 0.0f}, 0.55f, n, 0.75f, 0.95f,
               {0.85f, 0.30f, 0.25f}, 1, 0);
      add_ball(out.protos, rng, {0.9f, 0.0f, 0.0f}, 0.60f, n, 0.75f, 0.95f,
               {0.25f, 0.45f, 0.85f}, 2, 1);
      out.cam_azimuth = 10.0f;
      out.cam_elevation = 4.0f;
      break;
    }
    case Scenario::kOccluder: {
      // Thin frontal disc the wall's hidden Gaussians can shine through.
      add_disc(out.protos, rng, 0.0f, 0.78f, n, 0.72f, 0.78f,
               {0.85f, 0.30f, 0.25f}, 1, 0);
      // Opaque aperture wall: full grid minus a central hole.
      {
        std::vector<Proto> wall;
        add_wall(wall, rng, 2.0f, 3.68f, 0.16f, 0.128f, 0.93f, 0.97f,
                 {0.45f, 0.50f, 0.60f}, 2, 1);
        for (const Proto& p : wall)
          if (p.pos.head<2>().norm() > 0.7f) out.protos.push_back(p);
      }
      // Lurkers behind the wall, straddling the disc's silhouette cone.
      for (int k = 0; k < 8; ++k) {
        const float phi = static_cast<float>(k) * float(M_PI) / 4.0f;
        Proto p;
        p.pos = Eigen::Vector3f(1.3f * std::cos(phi) + uniform(rng, -0.02f, 0.02f),
                                1.3f * std::sin(phi) + uniform(rng, -0.02f, 0.02f),
                                4.0f + uniform(rng, -0.02f, 0.02f));
        p.rot = Eigen::Quaternionf::Identity();
        const float s = 0.6f * uniform(rng, 0.97f, 1.03f);
        p.scale = Eigen::Vector3f(s, s, s);
        p.opacity = uniform(rng, 0.83f, 0.87f);
        p.color = jitter_color(rng, {0.25f, 0.8f, 0.3f}, 0.05f);
        p.base_id = 0;
        p.object = 2;
        out.protos.push_back(p);
      }
      out.cam_azimuth = 3.0f;
      out.cam_elevation = 1.5f;
      break;
    }
    case Scenario::kIdentityFlip: {
      add_ball(out.protos, rng, {-0.9f, 0.0f, 0.0f}, 0.55f, n, 0.75f, 0.95f,
               {0.85f, 0.30f, 0.25f}, 1, 0);
      add_ball(out.protos, rng, {0.7f, 0.0f, 0.0f}, 0.70f, 2 * n, 0.75f,
               0.95f, {0.25f, 0.45f, 0.85f}, 2, 1);
      out.spin = true;
      out.cam_azimuth = 10.0f;
      out.cam_elevation = 4.0f;
      break;
    }
    case Scenario::kBoundaryStress: {
      add_ball(out.protos, rng, {0.0f, 0.0f, 0.0f}, 0.80f, n, 0.85f, 0.95f,
               {0.85f, 0.30f, 0.25f}, 1, 0);
      add_wall(out.protos, rng, 2.5f, 4.0f, 0.2f, 0.18f, 0.93f, 0.97f,
               {0.5f, 0.5f, 0.5f}, 0, 1);
      // Oversized low-opacity stacks straddling the silhouette.
      for (int loc = 0; loc < 4; ++loc) {
        const float phi = static_cast<float>(loc) * float(M_PI) / 2.0f;
        for (int k = 0; k < 4; ++k) {
          Proto p;
          p.pos = Eigen::Vector3f(
              0.40f * std::cos(phi) + uniform(rng, -0.02f, 0.02f),
              0.40f * std::sin(phi) + uniform(rng, -0.02f, 0.02f),
              -1.2f + uniform(rng, -0.02f, 0.02f));
          p.rot = Eigen::Quaternionf::Identity();
          const float s = 0.45f * uniform(rng, 0.97f, 1.03f);
          p.scale = Eigen::Vector3f(s, s, s);
          p.opacity = uniform(rng, 0.21f, 0.23f);
          p.color = jitter_color(rng, {0.9f, 0.55f, 0.2f}, 0.05f);
          p.base_id = 1;
          p.object = 2;
          out.protos.push_back(p);
        }
      }
      out.cam_azimuth = 1.5f;
      out.cam_elevation = 0.75f;
      break;
    }
  }
  return out;
}

// Object centers for the spinning scenario.
Eigen::Vector3f object_center(Scenario scenario, int object) {
  if (scenario == Scenario::kIdentityFlip)
    return object == 0 ? Eigen::Vector3f(-0.9f, 0.0f, 0.0f)
                       : Eigen::Vector3f(0.7f, 0.0f, 0.0f);
  return Eigen::Vector3f::Zero();
}

}  // namespace

SynthDataset generate(const SynthSpec& spec) {
  if (spec.gaussians_per_object < 1)
    throw ValidationError("gaussians_per_object must be positive");
  if (spec.frames < 1) throw ValidationError("frames must be positive");
  if (spec.scenario == Scenario::kIdentityFlip && spec.frames < 2)
    throw ValidationError("the identity flip needs at least two frames");
  if (spec.views_per_frame < 1)
    throw ValidationError("views_per_frame must be positive");
  if (spec.width < 16 || spec.height < 16)
    throw ValidationError("image size must be at least 16x16");

  Rng rng(spec.seed);
  const ScenarioLayout layout = build_layout(spec, rng);
  const int total = static_cast<int>(layout.protos.size());

  SynthDataset dataset{DynamicScene(total, spec.frames), {}, {}, {}, {}, {}};

  for (int t = 0; t < spec.frames; ++t) {
    auto frame = dataset.scene.frame(t);
    for (int i = 0; i < total; ++i) {
      const Proto& p = layout.protos[i];
      GaussianFrameParams g;
      if (layout.spin) {
        const float sign = p.object == 0 ? 1.0f : -1.0f;
        const float angle =
            sign * 4.0f * float(M_PI) / 180.0f * static_cast<float>(t);
        const Eigen::Quaternionf spin(
            Eigen::AngleAxisf(angle, Eigen::Vector3f::UnitY()));
        const Eigen::Vector3f center =
            object_center(spec.scenario, p.object);
        g.mean = center + spin * (p.pos - center);
        g.rotation = (spin * p.rot).normalized();
      } else {
        g.mean = p.pos;
        g.rotation = p.rot;
      }
      g.scale = p.scale;
      g.opacity = p.opacity;
      g.color = p.color;
      frame[i] = g;
    }
  }

  dataset.gt_assignment.assign(spec.frames,
                               std::vector<std::uint16_t>(total, 0));
  for (int t = 0; t < spec.frames; ++t)
    for (int i = 0; i < total; ++i) {
      const Proto& p = layout.protos[i];
      std::uint16_t id = p.base_id;
      if (spec.scenario == Scenario::kIdentityFlip && p.object == 1)
        id = t < spec.frames / 2 ? 2 : 1;
      dataset.gt_assignment[t][i] = id;
    }

  for (int t = 0; t < spec.frames; ++t)
    for (int v = 0; v < spec.views_per_frame; ++v) {
      const float az =
          uniform(rng, -layout.cam_azimuth, layout.cam_azimuth);
      const float el =
          uniform(rng, -layout.cam_elevation, layout.cam_elevation);
      dataset.cameras.push_back(look_at_camera(orbit_position(4.0f, az, el),
                                               spec.width, spec.height, t));
    }

  dataset.gt_masks =
      perfect_masks_from_gt(dataset.scene, dataset.cameras,
                            dataset.gt_assignment);
  dataset.surface_masks =
      surface_masks_from_gt(dataset.scene, dataset.cameras,
                            dataset.gt_assignment);

  dataset.masks = dataset.gt_masks;
  if (spec.mask_noise) {
    for (InstanceMask& mask : dataset.masks) {
      const bool grow = uniform(rng, 0.0f, 1.0f) < 0.5f;
      const Image<std::uint16_t> src = mask.labels;
      auto label_at = [&](int x, int y) -> std::uint16_t {
        if (x < 0 || y < 0 || x >= src.width || y >= src.height) return 0;
        return src.at(x, y);
      };
      for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
          if (grow && src.at(x, y) == 0) {
            for (auto [dx, dy] :
                 {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
              if (const std::uint16_t l = label_at(x + dx, y + dy)) {
                mask.labels.at(x, y) = l;
                break;
              }
            }
          } else if (!grow && src.at(x, y) != 0) {
            for (auto [dx, dy] :
                 {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
              if (label_at(x + dx, y + dy) == 0) {
                mask.labels.at(x, y) = 0;
                break;
              }
            }
          }
        }
    }
  }
  return dataset;
}

namespace {

std::vector<InstanceMask> argmax_masks(
    const DynamicScene& scene, std::span<const CameraView> cameras,
    const std::vector<std::vector<std::uint16_t>>& gt_assignment,
    bool trim_to_surface) {
  if (static_cast<int>(gt_assignment.size()) != scene.timestamp_count())
    throw ValidationError("assignment frame count does not match the scene");
  for (const auto& frame : gt_assignment)
    if (static_cast<int>(frame.size()) != scene.gaussian_count())
      throw ValidationError("assignment size does not match the scene");

  const TraceConfig cfg;
  std::vector<InstanceMask> masks;
  masks.reserve(cameras.size());
  for (const CameraView& cam : cameras) {
    cam.validate();
    if (cam.timestamp >= scene.timestamp_count())
      throw ValidationError("camera timestamp outside the scene");
    const auto frame = scene.frame(cam.timestamp);
    const std::vector<std::uint16_t>& ids = gt_assignment[cam.timestamp];

    std::vector<Projected2D> projected;
    projected.reserve(frame.size());
    for (int i = 0; i < static_cast<int>(frame.size()); ++i)
      if (auto p = project(frame[i], cam, i)) projected.push_back(*p);
    depth_sort(projected);

    const int tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    const int tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    std::vector<std::vector<std::uint32_t>> lists(
        static_cast<std::size_t>(tiles_x) * tiles_y);
    for (std::uint32_t j = 0; j < projected.size(); ++j) {
      const Projected2D& p = projected[j];
      const int px0 = std::max(
          0, static_cast<int>(
                 std::floor(p.mean2d.x() - p.footprint_radius - 0.5f)));
      const int px1 = std::min(
          cam.width - 1,
          static_cast<int>(std::ceil(p.mean2d.x() + p.footprint_radius)));
      const int py0 = std::max(
          0, static_cast<int>(
                 std::floor(p.mean2d.y() - p.footprint_radius - 0.5f)));
      const int py1 = std::min(
          cam.height - 1,
          static_cast<int>(std::ceil(p.mean2d.y() + p.footprint_radius)));
      if (px0 > px1 || py0 > py1) continue;
      for (int ty = py0 / kTileSize; ty <= py1 / kTileSize; ++ty)
        for (int tx = px0 / kTileSize; tx <= px1 / kTileSize; ++tx)
          lists[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(j);
    }

    InstanceMask mask;
    mask.labels = Image<std::uint16_t>(cam.width, cam.height);
    mask.timestamp = cam.timestamp;

    parallel_for(lists.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t tile = begin; tile < end; ++tile) {
        const auto& list = lists[tile];
        if (list.empty()) continue;
        const int tx = static_cast<int>(tile) % tiles_x;
        const int ty = static_cast<int>(tile) / tiles_x;
        const int x_end = std::min(cam.width, (tx + 1) * kTileSize);
        const int y_end = std::min(cam.height, (ty + 1) * kTileSize);
        for (int y = ty * kTileSize; y < y_end; ++y)
          for (int x = tx * kTileSize; x < x_end; ++x) {
            const float px = static_cast<float>(x) + 0.5f;
            const float py = static_cast<float>(y) + 0.5f;
            double transmittance = 1.0;
            double best = 0.0;
            std::uint16_t best_id = 0;
            for (const std::uint32_t j : list) {
              const Projected2D& p = projected[j];
              const float dx = px - p.mean2d.x();
              const float dy = py - p.mean2d.y();
              const float power =
                  0.5f * (p.conic(0, 0) * dx * dx +
                          p.conic(1, 1) * dy * dy) +
                  p.conic(0, 1) * dx * dy;
              if (power > kMaxKernelPower) continue;
              const float g = power <= 0.0f ? 1.0f : std::exp(-power);
              if (g <= cfg.alpha_cutoff) continue;
              const float alpha = std::min(
                  kMaxContributionAlpha, frame[p.source_index].opacity * g);
              if (alpha <= 0.0f) continue;
              const double w = alpha * transmittance;
              // Strictly greater: the front-most contributor keeps ties.
              if (w > best) {
                best = w;
                best_id = ids[p.source_index];
              }
              transmittance *= 1.0 - alpha;
              if (transmittance < cfg.transmittance_floor) break;
            }
            if (trim_to_surface && 1.0 - transmittance <= 0.5) best_id = 0;
            mask.labels.at(x, y) = best_id;
          }
      }
    });
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace

std::vector<InstanceMask> perfect_masks_from_gt(
    const DynamicScene& scene, std::span<const CameraView> cameras,
    const std::vector<std::vector<std::uint16_t>>& gt_assignment) {
  return argmax_masks(scene, cameras, gt_assignment, false);
}

std::vector<InstanceMask> surface_masks_from_gt(
    const DynamicScene& scene, std::span<const CameraView> cameras,
    const std::vector<std::vector<std::uint16_t>>& gt_assignment) {
  return argmax_masks(scene, cameras, gt_assignment, true);
}

namespace {

std::string frame_name(int value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", value);
  return buf;
}

}  // namespace

void write_dataset(const SynthDataset& dataset,
                   const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "masks");
  fs::create_directories(dir / "gt_masks");
  fs::create_directories(dir / "gt_frames");

  save_scene(dataset.scene, dir / "scene.g4ds");
  save_cameras(dataset.cameras, dir / "cameras.json");
  save_assignment(dataset.gt_assignment, dir / "gt_assignment.g4da");

  if (dataset.masks.size() != dataset.cameras.size() ||
      dataset.gt_masks.size() != dataset.cameras.size() ||
      dataset.surface_masks.size() != dataset.cameras.size())
    throw ValidationError("dataset masks are not aligned with its cameras");

  std::vector<std::uint8_t> frame_written(
      static_cast<std::size_t>(dataset.scene.timestamp_count()), 0);
  for (std::size_t v = 0; v < dataset.cameras.size(); ++v) {
    const std::string name = frame_name(static_cast<int>(v)) + ".pgm";
    save_mask(dataset.masks[v].labels, dir / "masks" / name);
    save_mask(dataset.gt_masks[v].labels, dir / "gt_masks" / name);
    const int t = dataset.cameras[v].timestamp;
    if (!frame_written[t]) {
      save_mask(dataset.surface_masks[v].labels,
                dir / "gt_frames" / (frame_name(t) + ".pgm"));
      frame_written[t] = 1;
    }
  }
}

void save_assignment(const std::vector<std::vector<std::uint16_t>>& assignment,
                     const std::filesystem::path& path) {
  if (assignment.empty())
    throw ValidationError("assignment must cover at least one frame");
  const std::size_t n = assignment.front().size();
  for (const auto& frame : assignment)
    if (frame.size() != n)
      throw ValidationError("assignment frames disagree on gaussian count");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("G4DA", 4);
  const std::uint32_t dims[2] = {static_cast<std::uint32_t>(n),
                                 static_cast<std::uint32_t>(assignment.size())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const auto& frame : assignment)
    out.write(reinterpret_cast<const char*>(frame.data()),
              static_cast<std::streamsize>(frame.size() * sizeof(std::uint16_t)));
  if (!out) throw FormatError("failed writing " + path.string());
}

std::vector<std::vector<std::uint16_t>> load_assignment(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "G4DA", 4) != 0)
    throw FormatError("not an assignment file: " + path.string());
  std::uint32_t dims[2];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof(dims)))
    throw FormatError("truncated assignment file: " + path.string());
  if (dims[0] == 0 || dims[1] == 0)
    throw FormatError("assignment dimensions must be positive");
  std::vector<std::vector<std::uint16_t>> assignment(
      dims[1], std::vector<std::uint16_t>(dims[0]));
  for (auto& frame : assignment)
    if (!in.read(reinterpret_cast<char*>(frame.data()),
                 static_cast<std::streamsize>(frame.size() *
                                              sizeof(std::uint16_t))))
      throw FormatError("truncated assignment file: " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw FormatError("trailing bytes in assignment file " + path.string());
  return assignment;
}

}  // namespace splatseg

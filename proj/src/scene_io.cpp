// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include "splatseg/scene_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace splatseg {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace {

constexpr char kSceneMagic[4] = {'G', '4', 'D', 'S'};
constexpr std::uint32_t kSceneVersion = 1;
// 3 mean + 4 quat + 3 scale + 1 opacity + 3 rgb
constexpr std::size_t kFloatsPerGaussian = 14;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

std::uint32_t read_u32(std::istream& in, const char* what) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw FormatError(std::string("truncated ") + what);
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

DynamicScene load_scene(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kSceneMagic, 4) != 0)
    throw FormatError("bad scene magic in " + path.string());
  const std::uint32_t version = read_u32(in, "scene version");
  if (version != kSceneVersion)
    throw FormatError("unsupported scene version " + std::to_string(version));
  const std::uint32_t n = read_u32(in, "gaussian count");
  const std::uint32_t t = read_u32(in, "timestamp count");
  if (t == 0) throw FormatError("scene has zero timestamps");

  DynamicScene scene(static_cast<int>(n), static_cast<int>(t));
  std::vector<float> block(static_cast<std::size_t>(n) * kFloatsPerGaussian);
  for (std::uint32_t ft = 0; ft < t; ++ft) {
    if (!in.read(reinterpret_cast<char*>(block.data()),
                 static_cast<std::streamsize>(block.size() * sizeof(float))))
      throw FormatError("truncated frame block " + std::to_string(ft));
    auto fr = scene.frame(static_cast<int>(ft));
    for (std::uint32_t i = 0; i < n; ++i) {
      const float* f = block.data() + i * kFloatsPerGaussian;
      GaussianFrameParams& p = fr[i];
      p.mean = {f[0], f[1], f[2]};
      p.rotation = Eigen::Quaternionf(f[3], f[4], f[5], f[6]);  // w, x, y, z
      p.scale = {f[7], f[8], f[9]};
      p.opacity = f[10];
      p.color = {f[11], f[12], f[13]};
    }
  }
  char extra = 0;
  if (in.read(&extra, 1))
    throw FormatError("trailing bytes after last frame block");
  scene.validate();
  return scene;
}

void save_scene(const DynamicScene& scene, const std::filesystem::path& path) {
  scene.validate();
  std::ofstream out = open_out(path);
  out.write(kSceneMagic, 4);
  write_u32(out, kSceneVersion);
  write_u32(out, static_cast<std::uint32_t>(scene.gaussian_count()));
  write_u32(out, static_cast<std::uint32_t>(scene.timestamp_count()));
  std::vector<float> block(
      static_cast<std::size_t>(scene.gaussian_count()) * kFloatsPerGaussian);
  for (int t = 0; t < scene.timestamp_count(); ++t) {
    const auto fr = scene.frame(t);
    for (int i = 0; i < scene.gaussian_count(); ++i) {
      float* f = block.data() + static_cast<std::size_t>(i) * kFloatsPerGaussian;
      const GaussianFrameParams& p = fr[i];
      f[0] = p.mean.x();
      f[1] = p.mean.y();
      f[2] = p.mean.z();
      f[3] = p.rotation.w();
      f[4] = p.rotation.x();
      f[5] = p.rotation.y();
      f[6] = p.rotation.z();
      f[7] = p.scale.x();
      f[8] = p.scale.y();
      f[9] = p.scale.z();
      f[10] = p.opacity;
      f[11] = p.color.x();
      f[12] = p.color.y();
      f[13] = p.color.z();
    }
    out.write(reinterpret_cast<const char*>(block.data()),
              static_cast<std::streamsize>(block.size() * sizeof(float)));
  }
  if (!out) throw FormatError("short write to " + path.string());
}

namespace {

// Reads one PGM header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (tok.empty()) throw FormatError("truncated PGM header");
  return tok;
}

long pgm_number(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw FormatError(std::string("bad PGM ") + what + ": " + tok);
  return v;
}

}  // namespace

Image<std::uint16_t> load_mask(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  if (pgm_token(in) != "P5") throw FormatError("mask is not binary PGM (P5)");
  const long w = pgm_number(in, "width");
  const long h = pgm_number(in, "height");
  const long maxval = pgm_number(in, "maxval");
  if (w <= 0 || h <= 0) throw FormatError("bad PGM dimensions");
  if (maxval != 65535)
    throw FormatError("mask PGM must use maxval 65535, got " +
                      std::to_string(maxval));
  Image<std::uint16_t> img(static_cast<int>(w), static_cast<int>(h));
  std::vector<unsigned char> raw(img.pixel_count() * 2);
  if (!in.read(reinterpret_cast<char*>(raw.data()),
               static_cast<std::streamsize>(raw.size())))
    throw FormatError("truncated PGM payload");
  for (std::size_t i = 0; i < img.pixel_count(); ++i)
    img.data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  return img;
}

void save_mask(const Image<std::uint16_t>& labels,
               const std::filesystem::path& path) {
  if (labels.channels != 1)
    throw ValidationError("mask image must be single-channel");
  std::ofstream out = open_out(path);
  out << "P5\n" << labels.width << " " << labels.height << "\n65535\n";
  std::vector<unsigned char> raw(labels.pixel_count() * 2);
  for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(labels.data[i] >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(labels.data[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

std::vector<CameraView> load_cameras(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad cameras JSON: " + std::string(e.what()));
  }
  if (!doc.is_array()) throw FormatError("cameras JSON must be an array");
  std::vector<CameraView> cameras;
  cameras.reserve(doc.size());
  for (const auto& entry : doc) {
    try {
      CameraView cam;
      cam.fx = entry.at("fx").get<float>();
      cam.fy = entry.at("fy").get<float>();
      cam.cx = entry.at("cx").get<float>();
      cam.cy = entry.at("cy").get<float>();
      cam.width = entry.at("width").get<int>();
      cam.height = entry.at("height").get<int>();
      cam.timestamp = entry.at("timestamp").get<int>();
      const auto& m = entry.at("world_to_camera");
      if (!m.is_array() || m.size() != 16)
        throw FormatError("world_to_camera must hold 16 numbers");
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
          cam.world_to_camera(r, c) = m[4 * r + c].get<float>();
      cam.validate();
      cameras.push_back(cam);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("bad camera entry: " + std::string(e.what()));
    }
  }
  return cameras;
}

void save_cameras(std::span<const CameraView> cameras,
                  const std::filesystem::path& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const CameraView& cam : cameras) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m.push_back(cam.world_to_camera(r, c));
    doc.push_back({{"fx", cam.fx},
                   {"fy", cam.fy},
                   {"cx", cam.cx},
                   {"cy", cam.cy},
                   {"width", cam.width},
                   {"height", cam.height},
                   {"world_to_camera", std::move(m)},
                   {"timestamp", cam.timestamp}});
  }
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw FormatError("short write to " + path.string());
}

void save_pointcloud(const DynamicScene& scene,
                     std::span<const std::uint8_t> selection, int t,
                     const std::filesystem::path& path) {
  if (static_cast<int>(selection.size()) != scene.gaussian_count())
    throw ValidationError("selection size does not match gaussian count");
  if (t < 0 || t >= scene.timestamp_count())
    throw ValidationError("pointcloud timestamp out of range");
  std::size_t count = 0;
  for (std::uint8_t s : selection) count += s ? 1 : 0;

  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << count
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\n"
         "end_header\n";
  const auto fr = scene.frame(t);
  char line[128];
  for (int i = 0; i < scene.gaussian_count(); ++i) {
    if (!selection[i]) continue;
    const GaussianFrameParams& p = fr[i];
    const auto byte = [](float v) {
      return static_cast<int>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    };
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %d %d %d\n", p.mean.x(),
                  p.mean.y(), p.mean.z(), byte(p.color.x()), byte(p.color.y()),
                  byte(p.color.z()));
    out << line;
  }
  if (!out) throw FormatError("short write to " + path.string());
}

void save_ppm(const Image<float>& rgb, const std::filesystem::path& path) {
  if (rgb.channels != 3) throw ValidationError("PPM image must have 3 channels");
  std::ofstream out = open_out(path);
  out << "P6\n" << rgb.width << " " << rgb.height << "\n255\n";
  std::vector<unsigned char> raw(rgb.data.size());
  for (std::size_t i = 0; i < rgb.data.size(); ++i)
    raw[i] = static_cast<unsigned char>(
        std::lround(std::clamp(rgb.data[i], 0.0f, 1.0f) * 255.0f));
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace splatseg

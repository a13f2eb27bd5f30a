// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "splatseg/scene_io.hpp"
#include "splatseg/types.hpp"

using namespace splatseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  const fs::path dir = fs::temp_directory_path() / "splatseg_tests";
  fs::create_directories(dir);
  return dir / name;
}

DynamicScene sample_scene() {
  DynamicScene scene(3, 2);
  for (int t = 0; t < 2; ++t) {
    for (int i = 0; i < 3; ++i) {
      GaussianFrameParams& p = scene.at(i, t);
      p.mean = Eigen::Vector3f(0.1f * i, -0.2f * t, 1.0f + i + t);
      p.rotation =
          Eigen::Quaternionf(1.0f, 0.1f * i, 0.2f * t, 0.05f).normalized();
      p.scale = Eigen::Vector3f(0.1f + 0.01f * i, 0.2f, 0.3f);
      p.opacity = 0.25f * (i + 1);
      p.color = Eigen::Vector3f(0.1f, 0.5f, 0.9f);
    }
  }
  return scene;
}

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("scene frame storage is frame-major and indexable") {
  DynamicScene scene = sample_scene();
  CHECK(scene.gaussian_count() == 3);
  CHECK(scene.timestamp_count() == 2);
  CHECK(scene.frame(1).size() == 3);
  CHECK(scene.at(2, 1).mean.x() == doctest::Approx(0.2f));
  CHECK(&scene.frame(1)[2] == &scene.at(2, 1));
}

TEST_CASE("scene validation names the offending gaussian and timestamp") {
  DynamicScene scene = sample_scene();
  scene.at(2, 1).opacity = 1.5f;
  CHECK_THROWS_WITH_AS(scene.validate(),
                       "gaussian 2 at timestamp 1: opacity outside [0,1]",
                       ValidationError);

  scene = sample_scene();
  scene.at(0, 0).scale.y() = 0.0f;
  CHECK_THROWS_WITH_AS(scene.validate(),
                       "gaussian 0 at timestamp 0: scale must be positive",
                       ValidationError);

  scene = sample_scene();
  scene.at(1, 0).rotation.coeffs() *= 2.0f;
  CHECK_THROWS_AS(scene.validate(), ValidationError);

  scene = sample_scene();
  scene.at(1, 1).mean.z() = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(scene.validate(), ValidationError);
}

TEST_CASE("camera validation rejects broken transforms") {
  CameraView cam = testing::make_camera(32, 24, 30.0f);
  CHECK_NOTHROW(cam.validate());

  CameraView bad = cam;
  bad.width = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cam;
  bad.fy = -1.0f;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cam;
  bad.world_to_camera(0, 0) = 2.0f;  // no longer orthonormal
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cam;
  bad.world_to_camera(3, 0) = 0.5f;  // projective bottom row
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = cam;
  bad.timestamp = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("max_label and validate_target scan every mask") {
  std::vector<InstanceMask> masks;
  masks.push_back(testing::flat_mask(4, 4, 0));
  masks.push_back(testing::split_mask(4, 4, 2, 0, 3));
  CHECK(max_label(masks) == 3);
  CHECK_NOTHROW(validate_target(3, masks));
  CHECK_THROWS_AS(validate_target(2, masks), ValidationError);
  CHECK_THROWS_AS(validate_target(0, masks), ValidationError);
}

TEST_CASE("scene container round-trips exactly") {
  const fs::path path = temp_file("roundtrip.g4ds");
  DynamicScene scene = sample_scene();
  save_scene(scene, path);
  DynamicScene loaded = load_scene(path);
  REQUIRE(loaded.gaussian_count() == scene.gaussian_count());
  REQUIRE(loaded.timestamp_count() == scene.timestamp_count());
  for (int t = 0; t < scene.timestamp_count(); ++t) {
    for (int i = 0; i < scene.gaussian_count(); ++i) {
      const GaussianFrameParams& a = scene.at(i, t);
      const GaussianFrameParams& b = loaded.at(i, t);
      CHECK(a.mean == b.mean);
      CHECK(a.rotation.coeffs() == b.rotation.coeffs());
      CHECK(a.scale == b.scale);
      CHECK(a.opacity == b.opacity);
      CHECK(a.color == b.color);
    }
  }
}

TEST_CASE("scene loader rejects malformed bytes") {
  const fs::path path = temp_file("broken.g4ds");
  save_scene(sample_scene(), path);
  std::vector<char> bytes = read_bytes(path);

  SUBCASE("bad magic") {
    bytes[0] = 'X';
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_scene(path), FormatError);
  }
  SUBCASE("unsupported version") {
    bytes[4] = 9;
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_scene(path), FormatError);
  }
  SUBCASE("truncated frame block") {
    bytes.resize(bytes.size() - 5);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_scene(path), FormatError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_scene(path), FormatError);
  }
  SUBCASE("well-formed bytes with invalid values") {
    // Opacity of gaussian 0 at frame 0 lives right after the 16-byte header
    // and 10 leading floats.
    const std::size_t off = 16 + 10 * sizeof(float);
    const float bad = 7.0f;
    std::memcpy(bytes.data() + off, &bad, sizeof(bad));
    write_bytes(path, bytes);
    CHECK_THROWS_AS(load_scene(path), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_scene(temp_file("does_not_exist.g4ds")), FormatError);
  }
}

TEST_CASE("mask PGM round-trips 16-bit labels") {
  const fs::path path = temp_file("mask.pgm");
  Image<std::uint16_t> labels(5, 3, 1, 0);
  labels.at(0, 0) = 1;
  labels.at(4, 2) = 65535;
  labels.at(2, 1) = 258;  // distinct high and low bytes
  save_mask(labels, path);
  Image<std::uint16_t> loaded = load_mask(path);
  CHECK(loaded == labels);
}

TEST_CASE("mask loader rejects malformed PGM") {
  const fs::path path = temp_file("mask_bad.pgm");

  SUBCASE("wrong magic") {
    std::ofstream(path) << "P2\n2 2\n65535\n0 0 0 0\n";
    CHECK_THROWS_AS(load_mask(path), FormatError);
  }
  SUBCASE("wrong maxval") {
    std::ofstream(path) << "P5\n2 2\n255\n\0\0\0\0";
    CHECK_THROWS_AS(load_mask(path), FormatError);
  }
  SUBCASE("truncated payload") {
    std::ofstream(path) << "P5\n2 2\n65535\n\0\0";
    CHECK_THROWS_AS(load_mask(path), FormatError);
  }
  SUBCASE("comments and whitespace are fine") {
    Image<std::uint16_t> labels(2, 1, 1, 7);
    save_mask(labels, temp_file("mask_ok.pgm"));
    std::vector<char> bytes = read_bytes(temp_file("mask_ok.pgm"));
    // Rewrite the header with a comment line in the middle.
    std::vector<char> patched;
    const std::string header = "P5\n# synthetic\n2 1\n65535\n";
    patched.insert(patched.end(), header.begin(), header.end());
    patched.insert(patched.end(), bytes.end() - 4, bytes.end());
    write_bytes(path, patched);
    CHECK(load_mask(path) == labels);
  }
}

TEST_CASE("cameras JSON round-trips") {
  const fs::path path = temp_file("cameras.json");
  std::vector<CameraView> cams;
  CameraView a = testing::make_camera(64, 48, 55.0f, 0);
  CameraView b = testing::make_camera(32, 32, 28.0f, 3);
  b.world_to_camera(0, 3) = 1.5f;  // translation survives
  cams.push_back(a);
  cams.push_back(b);
  save_cameras(cams, path);
  std::vector<CameraView> loaded = load_cameras(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].fx == a.fx);
  CHECK(loaded[0].width == a.width);
  CHECK(loaded[1].timestamp == 3);
  CHECK(loaded[1].world_to_camera == b.world_to_camera);
}

TEST_CASE("camera loader rejects bad JSON") {
  const fs::path path = temp_file("cameras_bad.json");

  SUBCASE("not an array") {
    std::ofstream(path) << "{}";
    CHECK_THROWS_AS(load_cameras(path), FormatError);
  }
  SUBCASE("missing field") {
    std::ofstream(path) << R"([{"fx": 1.0}])";
    CHECK_THROWS_AS(load_cameras(path), FormatError);
  }
  SUBCASE("syntax error") {
    std::ofstream(path) << "[{";
    CHECK_THROWS_AS(load_cameras(path), FormatError);
  }
  SUBCASE("invalid camera values") {
    std::vector<CameraView> cams = {testing::make_camera(8, 8, 8.0f)};
    save_cameras(cams, path);
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"width\": 8");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 10, "\"width\": 0");
    std::ofstream(path) << text;
    CHECK_THROWS_AS(load_cameras(path), ValidationError);
  }
}

TEST_CASE("pointcloud export writes selected gaussians") {
  const fs::path path = temp_file("cloud.ply");
  DynamicScene scene = sample_scene();
  std::vector<std::uint8_t> selection = {1, 0, 1};
  save_pointcloud(scene, selection, 1, path);

  std::ifstream in(path);
  std::string line;
  int vertex_count = -1;
  int data_lines = 0;
  bool in_header = true;
  while (std::getline(in, line)) {
    if (in_header) {
      if (line.rfind("element vertex ", 0) == 0)
        vertex_count = std::stoi(line.substr(15));
      if (line == "end_header") in_header = false;
    } else if (!line.empty()) {
      ++data_lines;
    }
  }
  CHECK(vertex_count == 2);
  CHECK(data_lines == 2);

  std::vector<std::uint8_t> wrong_size = {1, 0};
  CHECK_THROWS_AS(save_pointcloud(scene, wrong_size, 1, path),
                  ValidationError);
  CHECK_THROWS_AS(save_pointcloud(scene, selection, 5, path), ValidationError);
}

TEST_CASE("PPM export clamps and quantizes") {
  const fs::path path = temp_file("img.ppm");
  Image<float> rgb(2, 1, 3, 0.0f);
  rgb.at(0, 0, 0) = 1.5f;   // clamps to 255
  rgb.at(0, 0, 1) = -0.2f;  // clamps to 0
  rgb.at(0, 0, 2) = 0.5f;   // rounds to 128
  rgb.at(1, 0, 0) = 1.0f;
  save_ppm(rgb, path);
  std::vector<char> bytes = read_bytes(path);
  const std::string header = "P6\n2 1\n255\n";
  REQUIRE(bytes.size() == header.size() + 6);
  const unsigned char* px =
      reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
  CHECK(px[0] == 255);
  CHECK(px[1] == 0);
  CHECK(px[2] == 128);
  CHECK(px[3] == 255);

  Image<float> gray(2, 1, 1, 0.0f);
  CHECK_THROWS_AS(save_ppm(gray, path), ValidationError);
}

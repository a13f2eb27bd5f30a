// Copyright Contributors to the SplatSeg Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "helpers.hpp"
#include "splatseg/rrc.hpp"

using namespace splatseg;

namespace {

// One gaussian fully inside the target label and one whose footprint
// straddles the label boundary on a split mask.
struct StraddleScene {
  DynamicScene scene{2, 1};
  CameraView cam = testing::make_camera(64, 64, 60.0f);
  InstanceMask mask = testing::split_mask(64, 64, 32, 1, 0);
  std::vector<ViewRef> views;
  TemporalSegments segments;

  StraddleScene() {
    // Fully inside the left (label 1) half.
    scene.at(0, 0) = testing::isotropic({-0.8f, 0.0f, 3.0f}, 0.2f, 0.9f);
    // Centered on the boundary: half its mass on each side.
    scene.at(1, 0) = testing::isotropic({0.0f, 0.0f, 3.0f}, 0.2f, 0.8f);
    views.push_back({&cam, &mask, 0});
    segments.starts = {0};
    segments.total_timestamps = 1;
    segments.masks = {SegmentMask{{1, 1}}};
  }
};

}  // namespace

TEST_CASE("sparse frame field set, lookup, and densify") {
  SparseFrameField f;
  f.set(3, 1, 0.5f);
  f.set(1, 1, 0.25f);
  f.set(3, 1, 0.75f);  // overwrite
  CHECK(f.frame_count() == 2);
  CHECK(f.value_or(3, 1, -1.0f) == 0.75f);
  CHECK(f.value_or(1, 1, -1.0f) == 0.25f);
  CHECK(f.value_or(0, 1, -1.0f) == -1.0f);
  CHECK(f.value_or(3, 0, -1.0f) == -1.0f);  // empty frame
  CHECK(f.value_or(3, 9, -1.0f) == -1.0f);  // out of range
  CHECK(f.frames[1].size() == 2);
  CHECK(f.frames[1][0].first == 1);  // sorted by gaussian

  const std::vector<float> dense = f.densify(1, 5, 0.0f, 1.0f);
  CHECK(dense == std::vector<float>{0.0f, 0.25f, 0.0f, 0.75f, 0.0f});
  // A frame with no entries densifies to the empty fill.
  CHECK(f.densify(0, 3, 0.0f, 1.0f) == std::vector<float>{1.0f, 1.0f, 1.0f});
  CHECK(f.densify(7, 2, 0.0f, 0.5f) == std::vector<float>{0.5f, 0.5f});

  CHECK_THROWS_AS(f.set(0, -1, 1.0f), ValidationError);
  SparseFrameField out_of_range;
  out_of_range.set(10, 0, 1.0f);
  CHECK_THROWS_AS(out_of_range.densify(0, 5, 0.0f, 1.0f), ValidationError);
}

TEST_CASE("initial ranges equal the in-mask probability") {
  StraddleScene s;
  const RangeThresholds r0 =
      rrc_init(s.scene, s.views, s.segments, 2, 1, TraceConfig{});
  REQUIRE(r0.frame_count() == 1);
  // Gaussian 0 lies fully inside label 1.
  CHECK(r0.value_or(0, 0, -1.0f) == doctest::Approx(1.0f));
  // Gaussian 1 straddles the split, so its probability is about one half.
  CHECK(r0.value_or(1, 0, -1.0f) == doctest::Approx(0.5f).epsilon(0.05));
}

TEST_CASE("initial ranges respect segment membership and unset masks") {
  StraddleScene s;
  s.segments.masks = {SegmentMask{{1, 0}}};
  const RangeThresholds r0 =
      rrc_init(s.scene, s.views, s.segments, 2, 1, TraceConfig{});
  CHECK(r0.value_or(0, 0, -1.0f) >= 0.0f);
  CHECK(r0.value_or(1, 0, -1.0f) == -1.0f);  // not keyed

  s.segments.masks = {SegmentMask{}};  // unset: no evidence, nothing keyed
  const RangeThresholds unset =
      rrc_init(s.scene, s.views, s.segments, 2, 1, TraceConfig{});
  CHECK(unset.frames[0].empty());

  TemporalSegments wrong = s.segments;
  wrong.total_timestamps = 2;
  CHECK_THROWS_AS(rrc_init(s.scene, s.views, wrong, 2, 1, TraceConfig{}),
                  ValidationError);
  CHECK_THROWS_AS(rrc_init(s.scene, s.views, s.segments, 2, 0, TraceConfig{}),
                  ValidationError);
}

TEST_CASE("a fully in-mask gaussian keeps r = 1 and a straddler decays") {
  StraddleScene s;
  const TraceConfig cfg;
  const RangeThresholds r0 = rrc_init(s.scene, s.views, s.segments, 2, 1, cfg);
  const RrcStepResult step1 =
      rrc_step(s.scene, s.views, s.segments, r0, 2, 1, cfg);

  // p = 1 snaps and leaves the threshold untouched.
  CHECK(step1.thresholds.value_or(0, 0, -1.0f) == 1.0f);
  CHECK(step1.probabilities.value_or(0, 0, -1.0f) == 1.0f);

  // The straddler is truncated to g > 1 - r ~ 0.5. The kept level set stays
  // centered on the label boundary, so p remains near 0.5 and r shrinks
  // geometrically.
  const float r1 = step1.thresholds.value_or(1, 0, -1.0f);
  CHECK(r1 < 0.35f);
  CHECK(r1 > 0.1f);

  const RrcStepResult step2 =
      rrc_step(s.scene, s.views, s.segments, step1.thresholds, 2, 1, cfg);
  const float r2 = step2.thresholds.value_or(1, 0, -1.0f);
  CHECK(r2 < r1);
  CHECK(step2.thresholds.value_or(0, 0, -1.0f) == 1.0f);
  CHECK(step2.max_delta > 0.0);
}

TEST_CASE("thresholds never increase and zero is absorbing") {
  StraddleScene s;
  const TraceConfig cfg;
  RangeThresholds r = rrc_init(s.scene, s.views, s.segments, 2, 1, cfg);
  float prev = r.value_or(1, 0, -1.0f);
  for (int it = 0; it < 6; ++it) {
    r = rrc_step(s.scene, s.views, s.segments, r, 2, 1, cfg).thresholds;
    const float cur = r.value_or(1, 0, -1.0f);
    CHECK(cur <= prev);
    prev = cur;
  }

  // Force a zero threshold: the gaussian is skipped outright, traces no
  // weight, p = 0, and the threshold stays pinned at zero.
  r.set(1, 0, 0.0f);
  const RrcStepResult step = rrc_step(s.scene, s.views, s.segments, r, 2, 1, cfg);
  CHECK(step.thresholds.value_or(1, 0, -1.0f) == 0.0f);
  CHECK(step.probabilities.value_or(1, 0, -1.0f) == 0.0f);
}

TEST_CASE("the run converges once deltas fall under the early stop") {
  StraddleScene s;
  const RrcResult res =
      rrc_run(s.scene, s.views, s.segments, 2, 1, 60, TraceConfig{});
  CHECK(res.converged);
  CHECK(res.iterations <= 60);
  CHECK(res.thresholds.value_or(0, 0, -1.0f) == 1.0f);
  // The straddler has decayed to (numerically) zero by convergence.
  CHECK(res.thresholds.value_or(1, 0, -1.0f) < 0.01f);

  CHECK_THROWS_AS(rrc_run(s.scene, s.views, s.segments, 2, 1, 0,
                          TraceConfig{}),
                  ValidationError);
}

TEST_CASE("segmented rendering composites only the segment and its ranges") {
  StraddleScene s;
  TraceConfig cfg;

  // All-ones thresholds reproduce the untruncated subset render.
  RangeThresholds ones;
  ones.set(0, 0, 1.0f);
  ones.set(1, 0, 1.0f);
  const RenderOutput with_ranges =
      render_segmented(s.scene, s.cam, s.segments, &ones, cfg);
  const RenderOutput without =
      render_segmented(s.scene, s.cam, s.segments, nullptr, cfg);
  CHECK(with_ranges.alpha.data == without.alpha.data);
  CHECK(with_ranges.rgb.data == without.rgb.data);

  // Dropping the straddler's range erases it from the image.
  RangeThresholds cut;
  cut.set(0, 0, 1.0f);
  cut.set(1, 0, 0.0f);
  const RenderOutput trimmed =
      render_segmented(s.scene, s.cam, s.segments, &cut, cfg);
  CHECK(trimmed.alpha.at(32, 32) == 0.0f);
  CHECK(trimmed.alpha.at(16, 32) > 0.5f);

  // A camera on a timestamp whose segment mask is all-false renders black.
  TemporalSegments none = s.segments;
  none.masks = {SegmentMask{{0, 0}}};
  const RenderOutput black =
      render_segmented(s.scene, s.cam, none, nullptr, cfg);
  for (float a : black.alpha.data) CHECK(a == 0.0f);
}

TEST_CASE("range files round-trip and reject corruption") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "splatseg_tests";
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / "ranges.g4dr";

  RangeThresholds r;
  r.set(4, 0, 0.25f);
  r.set(1, 0, 1.0f);
  r.set(2, 2, 0.625f);
  // Frame 1 stays empty and must survive the round trip.
  save_ranges(r, path);
  const RangeThresholds loaded = load_ranges(path);
  CHECK(loaded == r);
  CHECK(loaded.frame_count() == 3);
  CHECK(loaded.frames[1].empty());

  std::vector<char> bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
  }
  const auto rewrite = [&](const std::vector<char>& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };

  std::vector<char> bad = bytes;
  bad[0] = 'X';
  rewrite(bad);
  CHECK_THROWS_AS(load_ranges(path), FormatError);

  bad = bytes;
  bad.resize(bad.size() - 2);
  rewrite(bad);
  CHECK_THROWS_AS(load_ranges(path), FormatError);

  bad = bytes;
  bad.push_back(0);
  rewrite(bad);
  CHECK_THROWS_AS(load_ranges(path), FormatError);

  // A threshold outside [0,1]: patch the first entry's value field.
  bad = bytes;
  const float big = 1.5f;
  std::memcpy(bad.data() + 12 + 8, &big, 4);
  rewrite(bad);
  CHECK_THROWS_AS(load_ranges(path), FormatError);

  // Swap the first two entries to break the (timestamp, gaussian) order.
  bad = bytes;
  for (int k = 0; k < 12; ++k) std::swap(bad[12 + k], bad[24 + k]);
  rewrite(bad);
  CHECK_THROWS_AS(load_ranges(path), FormatError);
}

TEST_CASE("view permutation does not change rrc results") {
  StraddleScene s;
  CameraView cam2 = s.cam;
  cam2.world_to_camera(1, 3) = 0.05f;
  InstanceMask mask2 = s.mask;
  std::vector<ViewRef> forward = {{&s.cam, &s.mask, 0}, {&cam2, &mask2, 1}};
  std::vector<ViewRef> reversed = {{&cam2, &mask2, 1}, {&s.cam, &s.mask, 0}};

  const RrcResult a =
      rrc_run(s.scene, forward, s.segments, 2, 1, 10, TraceConfig{});
  const RrcResult b =
      rrc_run(s.scene, reversed, s.segments, 2, 1, 10, TraceConfig{});
  CHECK(a.thresholds == b.thresholds);
  CHECK(a.iterations == b.iterations);
}

// Copyright 2026 The clanerf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include <algorithm>

#include "clanerf/conditioning.hpp"
#include "clanerf/error.hpp"
#include "support.hpp"

using namespace clanerf;
using clanerf::testing::uniform;

namespace {

Image random_image(Rng& rng, int w, int h) {
  Image img(w, h, 3);
  for (float& v : img.data()) v = static_cast<float>(uniform01(rng));
  return img;
}

// Camera at the origin looking down +z with focal length equal to the width.
Camera front_camera(int w, int h) {
  return Camera(Intrinsics{double(w), double(w), w / 2.0, h / 2.0, w, h}, RigidTransform());
}

// World point that projects to continuous pixel (u, v) at depth z.
Vec3 unproject(const Camera& cam, double u, double v, double z) {
  const Intrinsics& k = cam.intrinsics();
  return {(u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z};
}

ConditioningFeature feature(std::vector<float> values, bool valid) {
  ConditioningFeature f;
  f.values = std::move(values);
  f.valid = {valid};
  return f;
}

}  // namespace

TEST_CASE("identity encoder passes pixels through") {
  Rng rng = make_rng(70, 0);
  const Image img = random_image(rng, 8, 6);
  const FeatureMap f = extract_features({img, front_camera(8, 6)}, {EncoderKind::kIdentity, 1});
  CHECK(f.channels == 3);
  CHECK(f.data == img.data());
}

TEST_CASE("pyramid of a constant image is constant") {
  const Image img(16, 12, 3, 0.375f);
  const EncoderConfig cfg{EncoderKind::kPyramid, 4};
  const FeatureMap f = extract_features({img, front_camera(16, 12)}, cfg);
  CHECK(f.channels == cfg.feature_dim());
  for (float v : f.data) CHECK(v == doctest::Approx(0.375f).epsilon(1e-6));
}

TEST_CASE("pyramid levels keep a step edge monotone") {
  Image img(32, 8, 3, 0.0f);
  for (int y = 0; y < 8; ++y)
    for (int x = 16; x < 32; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0f;
  const FeatureMap f = extract_features({img, front_camera(32, 8)}, {EncoderKind::kPyramid, 3});
  for (int ch = 0; ch < f.channels; ++ch) {
    for (int x = 1; x < 32; ++x) CHECK(f.at(x, 4)[ch] >= f.at(x - 1, 4)[ch] - 1e-6f);
  }
  // Coarser levels are smoother at the edge.
  CHECK(f.at(15, 4)[6] > f.at(15, 4)[0]);
}

TEST_CASE("source image size must match its camera") {
  const Image img(8, 8, 3);
  CHECK_THROWS_AS(extract_features({img, front_camera(4, 4)}, {}), Error);
}

TEST_CASE("sampling at a pixel center returns that pixel") {
  Rng rng = make_rng(71, 0);
  const Image img = random_image(rng, 10, 7);
  const Camera cam = front_camera(10, 7);
  const FeatureMap f = extract_features({img, cam}, {EncoderKind::kIdentity, 1});
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 10; ++i) {
      const ConditioningFeature s = sample_feature(f, unproject(cam, i + 0.5, j + 0.5, 2.0), cam);
      REQUIRE(s.valid == std::vector<bool>{true});
      for (int c = 0; c < 3; ++c) CHECK(s.values[c] == doctest::Approx(img.at(i, j, c)).epsilon(1e-6));
    }
}

TEST_CASE("points behind the camera or off the image are invalid") {
  Rng rng = make_rng(72, 0);
  const Image img = random_image(rng, 8, 8);
  const Camera cam = front_camera(8, 8);
  const FeatureMap f = extract_features({img, cam}, {EncoderKind::kIdentity, 1});
  for (const Vec3& x : {Vec3(0, 0, -1), Vec3(0, 0, 0), unproject(cam, -0.5, 4, 1.0), unproject(cam, 4, 9, 1.0)}) {
    const ConditioningFeature s = sample_feature(f, x, cam);
    CHECK(s.valid == std::vector<bool>{false});
    CHECK(std::all_of(s.values.begin(), s.values.end(), [](float v) { return v == 0.0f; }));
  }
}

TEST_CASE("sampled features vary continuously") {
  Rng rng = make_rng(73, 0);
  const Image img = random_image(rng, 16, 16);
  const Camera cam = front_camera(16, 16);
  const FeatureMap f = extract_features({img, cam}, {EncoderKind::kPyramid, 2});
  for (int n = 0; n < 100; ++n) {
    const double u = uniform(rng, 1.0, 15.0), v = uniform(rng, 1.0, 15.0);
    const ConditioningFeature a = sample_feature(f, unproject(cam, u, v, 3.0), cam);
    const ConditioningFeature b = sample_feature(f, unproject(cam, u + 1e-4, v - 1e-4, 3.0), cam);
    for (int c = 0; c < f.channels; ++c) CHECK(std::abs(a.values[c] - b.values[c]) < 1e-3f);
  }
}

TEST_CASE("aggregation averages valid views only") {
  const std::vector<ConditioningFeature> all = {feature({1, 2}, true), feature({3, 6}, true)};
  const ConditioningFeature m = aggregate_views(all);
  CHECK(m.values == std::vector<float>{2, 4});
  CHECK(m.valid == std::vector<bool>{true, true});

  const std::vector<ConditioningFeature> partial = {feature({1, 2}, true), feature({0, 0}, false),
                                                    feature({5, 4}, true)};
  CHECK(aggregate_views(partial).values == std::vector<float>{3, 3});

  const std::vector<ConditioningFeature> none = {feature({0, 0}, false), feature({0, 0}, false)};
  const ConditioningFeature z = aggregate_views(none);
  CHECK(z.values == std::vector<float>{0, 0});
  CHECK(z.valid == std::vector<bool>{false, false});

  CHECK_THROWS_AS(aggregate_views(std::vector<ConditioningFeature>{}), Error);
}

TEST_CASE("aggregation is invariant to view order") {
  Rng rng = make_rng(74, 0);
  std::vector<ConditioningFeature> views;
  for (int i = 0; i < 6; ++i) {
    views.push_back(feature({float(uniform01(rng)), float(uniform01(rng)), float(uniform01(rng))}, i != 2));
  }
  const ConditioningFeature ref = aggregate_views(views);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(views.begin(), views.end(), rng);
    const ConditioningFeature s = aggregate_views(views);
    for (int c = 0; c < 3; ++c) CHECK(s.values[c] == doctest::Approx(ref.values[c]).epsilon(1e-6));
  }
}

TEST_CASE("conditioner combines several source views") {
  Rng rng = make_rng(75, 0);
  const Camera a = front_camera(8, 8);
  const Camera b(a.intrinsics(), RigidTransform(Mat3::Identity(), Vec3(0.05, 0, 0)));
  const Conditioner cond({{random_image(rng, 8, 8), a}, {random_image(rng, 8, 8), b}}, {EncoderKind::kPyramid, 2});
  CHECK(cond.feature_dim() == 6);
  CHECK(cond.view_count() == 2u);
  const ConditioningFeature f = cond.feature(Vec3(0.01, 0.02, 1.0));
  CHECK(f.values.size() == 6u);
  CHECK(f.valid.size() == 2u);
  std::vector<float> raw(6);
  cond.feature_into(Vec3(0.01, 0.02, 1.0), raw.data());
  CHECK(raw == f.values);
}

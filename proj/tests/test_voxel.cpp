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

#include "clanerf/voxel.hpp"
#include "support.hpp"

using namespace clanerf;
using clanerf::testing::uniform;

namespace {

VoxelGrid random_grid(Rng& rng) {
  VoxelGrid g(2, Vec3(-1, -1, -1), Vec3(1, 1, 1), {4, 5, 6});
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 4; ++i) {
        g.sigma(i, j, k) = static_cast<float>(uniform(rng, 0, 10));
        for (int c = 0; c < 3; ++c) g.rgb(i, j, k)[c] = static_cast<float>(uniform01(rng));
        for (int c = 0; c < 3; ++c) g.logits(i, j, k)[c] = static_cast<float>(uniform(rng, -3, 3));
      }
  return g;
}

}  // namespace

TEST_CASE("voxel centers return stored values exactly") {
  Rng rng = make_rng(60, 0);
  VoxelGrid g = random_grid(rng);
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 4; ++i) {
        const RadianceSample s = eval_field(g, g.voxel_center(i, j, k), Vec3::UnitZ());
        CHECK(s.sigma == g.sigma(i, j, k));
        CHECK(s.color[1] == g.rgb(i, j, k)[1]);
        CHECK(s.logits[2] == g.logits(i, j, k)[2]);
      }
}

TEST_CASE("midpoint between neighbouring centers is their mean") {
  Rng rng = make_rng(61, 0);
  VoxelGrid g = random_grid(rng);
  const Vec3 mid = 0.5 * (g.voxel_center(1, 2, 3) + g.voxel_center(2, 2, 3));
  const RadianceSample s = eval_field(g, mid, Vec3::UnitZ());
  CHECK(s.sigma == doctest::Approx(0.5 * (g.sigma(1, 2, 3) + g.sigma(2, 2, 3))).epsilon(1e-6));
}

TEST_CASE("constant grids are constant inside") {
  VoxelGrid g(1, Vec3(0, 0, 0), Vec3(1, 1, 1), {3, 3, 3});
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        g.sigma(i, j, k) = 2.5f;
        g.rgb(i, j, k)[0] = 0.25f;
      }
  Rng rng = make_rng(62, 0);
  for (int n = 0; n < 200; ++n) {
    const Vec3 x(uniform01(rng), uniform01(rng), uniform01(rng));
    const RadianceSample s = eval_field(g, x, Vec3::UnitZ());
    CHECK(s.sigma == doctest::Approx(2.5f));
    CHECK(s.color[0] == doctest::Approx(0.25f));
  }
  const RadianceSample out = eval_field(g, Vec3(2, 0.5, 0.5), Vec3::UnitZ());
  CHECK(out.sigma == 0.0f);
  CHECK(out.logits[1] > out.logits[0]);
}

TEST_CASE("baking an empty scene gives zero density") {
  const ProceduralScene empty(1, 1, {}, {});
  const VoxelGrid g = bake_procedural_to_voxel(empty, 8);
  Rng rng = make_rng(63, 0);
  for (int n = 0; n < 100; ++n) CHECK(eval_field(g, clanerf::testing::random_vec(rng), Vec3::UnitZ()).sigma == 0.0f);
}

TEST_CASE("baked box interior matches the analytic density") {
  Primitive box;
  box.size = Vec3(0.5, 0.4, 0.3);
  box.density = 7.0f;
  const ProceduralScene s(1, 1, {box}, {});
  const VoxelGrid g = bake_procedural_to_voxel(s, 128);
  CHECK(eval_field(g, Vec3(0.1, 0.05, -0.1), Vec3::UnitZ()).sigma == 7.0f);
}

TEST_CASE("baking converges at first order near boundaries") {
  Primitive sph;
  sph.shape = PrimitiveShape::kSphere;
  sph.size = Vec3(0.6, 0, 0);
  sph.density = 10.0f;
  const ProceduralScene s(1, 1, {sph}, {});
  Rng rng = make_rng(64, 0);
  std::vector<Vec3> pts;
  while (pts.size() < 1000) {
    const Vec3 x = clanerf::testing::random_vec(rng, 0.6);
    if (x.norm() < 0.6) pts.push_back(x);
  }
  auto l1 = [&](int res) {
    const VoxelGrid g = bake_procedural_to_voxel(s, res);
    double e = 0.0;
    for (const Vec3& x : pts) e += std::abs(eval_field(g, x, Vec3::UnitZ()).sigma - s.density_at(x));
    return e / pts.size();
  };
  const double e32 = l1(32), e64 = l1(64);
  CAPTURE(e32);
  CAPTURE(e64);
  CHECK(e64 / e32 == doctest::Approx(0.5).epsilon(0.3));
}

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

#include "clanerf/voxel.hpp"

#include <algorithm>
#include <cmath>

#include "clanerf/error.hpp"
#include "clanerf/parallel.hpp"

namespace clanerf {

VoxelGrid::VoxelGrid(int part_count, const Vec3& lo, const Vec3& hi, std::array<int, 3> resolution)
    : part_count_(part_count), lo_(lo), hi_(hi), res_(resolution) {
  if (part_count < 1) fail(ErrorCode::kInvalidArgument, "voxel grid needs at least one part");
  for (int a = 0; a < 3; ++a) {
    if (res_[a] < 2) fail(ErrorCode::kInvalidArgument, "voxel resolution must be at least 2 per axis");
    if (!(hi_[a] > lo_[a])) fail(ErrorCode::kInvalidArgument, "voxel bounds are empty");
    cell_[a] = (hi_[a] - lo_[a]) / res_[a];
  }
  const std::size_t n = static_cast<std::size_t>(res_[0]) * res_[1] * res_[2];
  sigma_.assign(n, 0.0f);
  rgb_.assign(3 * n, 0.0f);
  logits_.assign(n * num_classes(), 0.0f);
  for (std::size_t v = 0; v < n; ++v) write_one_hot(logits_.data() + v * num_classes(), num_classes(), part_count);
}

Vec3 VoxelGrid::voxel_center(int i, int j, int k) const {
  return lo_ + Vec3((i + 0.5) * cell_.x(), (j + 0.5) * cell_.y(), (k + 0.5) * cell_.z());
}

void VoxelGrid::evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                         SampleBuffer& out) const {
  check_conditioning(cond);
  if (x.size() != d.size()) fail(ErrorCode::kContract, "position/direction batch sizes differ");
  const int classes = num_classes();
  out.resize(x.size(), classes);
  for (std::size_t s = 0; s < x.size(); ++s) {
    const Vec3& p = x[s];
    bool inside = true;
    int i0[3];
    float f[3];
    for (int a = 0; a < 3; ++a) {
      if (!(p[a] >= lo_[a] && p[a] <= hi_[a])) {
        inside = false;
        break;
      }
      double g = std::clamp((p[a] - lo_[a]) / cell_[a] - 0.5, 0.0, double(res_[a] - 1));
      if (std::abs(g - std::round(g)) < 1e-9) g = std::round(g);
      i0[a] = std::min(static_cast<int>(g), res_[a] - 2);
      f[a] = static_cast<float>(g - i0[a]);
    }
    float* lg = out.logits_at(s);
    float* rgb = out.rgb_at(s);
    if (!inside) {
      out.sigma[s] = 0.0f;
      rgb[0] = rgb[1] = rgb[2] = 0.0f;
      write_one_hot(lg, classes, part_count_);
      continue;
    }
    // Nested linear interpolation v0 + f (v1 - v0): exact for equal corners.
    auto trilerp = [&](const std::vector<float>& data, int stride, int c) {
      auto at = [&](int di, int dj, int dk) {
        return data[voxel_index(i0[0] + di, i0[1] + dj, i0[2] + dk) * stride + c];
      };
      auto lerp = [](float a, float b, float t) { return t == 0.0f ? a : t == 1.0f ? b : a + t * (b - a); };
      const float x00 = lerp(at(0, 0, 0), at(1, 0, 0), f[0]);
      const float x10 = lerp(at(0, 1, 0), at(1, 1, 0), f[0]);
      const float x01 = lerp(at(0, 0, 1), at(1, 0, 1), f[0]);
      const float x11 = lerp(at(0, 1, 1), at(1, 1, 1), f[0]);
      return lerp(lerp(x00, x10, f[1]), lerp(x01, x11, f[1]), f[2]);
    };
    out.sigma[s] = std::max(0.0f, trilerp(sigma_, 1, 0));
    for (int c = 0; c < 3; ++c) rgb[c] = std::clamp(trilerp(rgb_, 3, c), 0.0f, 1.0f);
    for (int c = 0; c < classes; ++c) lg[c] = trilerp(logits_, classes, c);
  }
}

VoxelGrid bake_procedural_to_voxel(const ProceduralScene& scene, int resolution) {
  if (resolution < 2) fail(ErrorCode::kInvalidArgument, "voxel resolution must be at least 2");
  Vec3 lo, hi;
  scene.bounds(lo, hi);
  const Vec3 center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo).maxCoeff() * (1.0 + 2.0 / resolution) + 1e-9;
  VoxelGrid grid(scene.part_count(), center - Vec3::Constant(half), center + Vec3::Constant(half),
                 {resolution, resolution, resolution});
  const int classes = scene.num_classes();
  parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t kk) {
    const int k = static_cast<int>(kk);
    std::vector<Vec3> pts, dirs(static_cast<std::size_t>(resolution), Vec3::UnitZ());
    SampleBuffer buf;
    for (int j = 0; j < resolution; ++j) {
      pts.clear();
      for (int i = 0; i < resolution; ++i) pts.push_back(grid.voxel_center(i, j, k));
      scene.evaluate(pts, dirs, nullptr, buf);
      for (int i = 0; i < resolution; ++i) {
        grid.sigma(i, j, k) = buf.sigma[i];
        std::copy_n(buf.rgb_at(i), 3, grid.rgb(i, j, k));
        std::copy_n(buf.logits_at(i), classes, grid.logits(i, j, k));
      }
    }
  });
  return grid;
}

}  // namespace clanerf

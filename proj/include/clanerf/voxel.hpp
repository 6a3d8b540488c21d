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

#pragma once

#include "clanerf/field.hpp"
#include "clanerf/procedural.hpp"

namespace clanerf {

/// Dense grid of field values stored at voxel centers over the box [lo, hi].
/// Sampling is trilinear between centers and clamps to the outermost centers
/// inside the box; points outside the box are empty background.
class VoxelGrid final : public RadianceField {
 public:
  VoxelGrid(int part_count, const Vec3& lo, const Vec3& hi, std::array<int, 3> resolution);

  int part_count() const override { return part_count_; }
  void evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                SampleBuffer& out) const override;

  const std::array<int, 3>& resolution() const { return res_; }
  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }
  Vec3 voxel_center(int i, int j, int k) const;

  std::size_t voxel_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * res_[1] + j) * res_[0] + i;
  }
  float& sigma(int i, int j, int k) { return sigma_[voxel_index(i, j, k)]; }
  float* rgb(int i, int j, int k) { return rgb_.data() + 3 * voxel_index(i, j, k); }
  float* logits(int i, int j, int k) { return logits_.data() + num_classes() * voxel_index(i, j, k); }

 private:
  int part_count_;
  Vec3 lo_, hi_, cell_;
  std::array<int, 3> res_;
  std::vector<float> sigma_, rgb_, logits_;
};

/// Samples the scene at every voxel center of a cube grid covering its
/// bounds plus one cell of padding. Throws kInvalidArgument if resolution < 2.
VoxelGrid bake_procedural_to_voxel(const ProceduralScene& scene, int resolution);

}  // namespace clanerf

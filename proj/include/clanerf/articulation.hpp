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

#include <vector>

#include "clanerf/joint.hpp"
#include "clanerf/renderer.hpp"

namespace clanerf {

/// One rigid transform per class (parts first, background last) mapping
/// query-space points into the field's rest configuration.
struct DeformationSet {
  std::vector<RigidTransform> transforms;

  bool all_identity() const;
};

/// D for the child of joint j is the rotation about (u_j, v_j) by
/// -(pose[j] - rest[j]); the root part and background stay fixed. An empty
/// `rest` means all-zero rest angles. Throws kContract when the joint list
/// does not match the part count or the pose length.
DeformationSet build_deformations(const ArticulatedPose& pose, const ArticulatedPose& rest,
                                  const std::vector<JointAttributes>& joints, int part_count, int root_part = 1);

/// Articulation-aware compositing along one ray at fixed sample positions.
PixelResult composite_articulated(const RadianceField& field, const Ray& ray, std::span<const double> t,
                                  const DeformationSet& deformations, const Conditioner* cond,
                                  const std::array<float, 3>& background);

/// Full image at articulation `pose` relative to the field's rest pose.
RenderOutput render_articulated(const RadianceField& field, const Camera& camera, const ArticulatedPose& pose,
                                const std::vector<JointAttributes>& joints, const RenderConfig& config,
                                const Conditioner* cond = nullptr);

/// Batched rays at articulation `pose`; see render_rays for the RNG contract.
void render_rays_articulated(const RadianceField& field, std::span<const Ray> rays,
                             std::span<const std::uint64_t> ids, const ArticulatedPose& pose,
                             const std::vector<JointAttributes>& joints, const RenderConfig& config,
                             const Conditioner* cond, std::span<PixelResult> out);

}  // namespace clanerf

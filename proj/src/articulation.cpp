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

#include "clanerf/articulation.hpp"

#include <cmath>
#include <set>
#include <string>

#include "clanerf/error.hpp"

namespace clanerf {

bool DeformationSet::all_identity() const {
  for (const auto& t : transforms) {
    if (!t.is_identity()) return false;
  }
  return true;
}

DeformationSet build_deformations(const ArticulatedPose& pose, const ArticulatedPose& rest,
                                  const std::vector<JointAttributes>& joints, int part_count, int root_part) {
  if (part_count < 1 || root_part < 1 || root_part > part_count) {
    fail(ErrorCode::kContract, "invalid part count or root part");
  }
  if (static_cast<int>(joints.size()) != part_count - 1) {
    fail(ErrorCode::kContract, "expected " + std::to_string(part_count - 1) + " joints, got " +
                                   std::to_string(joints.size()));
  }
  if (pose.size() != joints.size()) fail(ErrorCode::kContract, "pose length must equal the joint count");
  if (!rest.empty() && rest.size() != joints.size()) {
    fail(ErrorCode::kContract, "rest pose length must equal the joint count");
  }
  DeformationSet out;
  out.transforms.assign(part_count + 1, RigidTransform::identity());
  std::set<int> seen;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const JointAttributes& jt = joints[j];
    if (jt.child_part < 1 || jt.child_part > part_count || jt.child_part == root_part ||
        !seen.insert(jt.child_part).second) {
      fail(ErrorCode::kContract, "joint " + std::to_string(j) + " has an invalid child part");
    }
    if (!std::isfinite(pose[j])) fail(ErrorCode::kDomain, "pose angles must be finite");
    const double delta = pose[j] - (rest.empty() ? 0.0 : rest[j]);
    out.transforms[jt.child_part - 1] = rotation_about_axis(jt.axis, jt.pivot, -delta);
  }
  return out;
}

PixelResult composite_articulated(const RadianceField& field, const Ray& ray, std::span<const double> t,
                                  const DeformationSet& deformations, const Conditioner* cond,
                                  const std::array<float, 3>& background) {
  if (static_cast<int>(deformations.transforms.size()) != field.num_classes()) {
    fail(ErrorCode::kContract, "need one deformation per class including background");
  }
  return composite_deformed(field, ray, t, deformations.transforms, cond, background);
}

namespace {

ClassTransforms transforms_for(const RadianceField& field, const ArticulatedPose& pose,
                               const std::vector<JointAttributes>& joints) {
  return build_deformations(pose, field.rest_pose(), joints, field.part_count()).transforms;
}

}  // namespace

RenderOutput render_articulated(const RadianceField& field, const Camera& camera, const ArticulatedPose& pose,
                                const std::vector<JointAttributes>& joints, const RenderConfig& config,
                                const Conditioner* cond) {
  return render_image_deformed(field, camera, config, transforms_for(field, pose, joints), cond);
}

void render_rays_articulated(const RadianceField& field, std::span<const Ray> rays,
                             std::span<const std::uint64_t> ids, const ArticulatedPose& pose,
                             const std::vector<JointAttributes>& joints, const RenderConfig& config,
                             const Conditioner* cond, std::span<PixelResult> out) {
  render_rays(field, rays, ids, config, transforms_for(field, pose, joints), cond, out);
}

}  // namespace clanerf

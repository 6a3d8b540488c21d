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

#include "clanerf/geometry.hpp"

namespace clanerf {

/// Revolute joint: rotation axis direction and a pivot point on the axis.
struct JointAttributes {
  Vec3 axis = Vec3::UnitZ();
  Vec3 pivot = Vec3::Zero();
  int child_part = 2;  // part id, 1-based
};

/// Joint angles in radians, one per non-root part.
using ArticulatedPose = std::vector<double>;

/// Throws kDomain unless the axis is unit-norm within 1e-9 (after the caller
/// normalized it) and all values are finite.
void validate_joint(const JointAttributes& joint);

/// Returns the joint with a normalized axis; throws kDomain for a zero axis.
JointAttributes normalized_joint(JointAttributes joint);

}  // namespace clanerf

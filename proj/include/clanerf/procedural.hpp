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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "clanerf/field.hpp"
#include "clanerf/joint.hpp"

namespace clanerf {

enum class PrimitiveShape { kBox, kSphere, kCylinder };

/// Solid of uniform density and color, defined in its local frame:
/// box = half extents, sphere = radius (size.x), cylinder = radius (size.x)
/// and half height (size.z) along local z.
struct Primitive {
  PrimitiveShape shape = PrimitiveShape::kBox;
  Vec3 size = Vec3::Constant(0.5);
  RigidTransform local_to_world;
  int part = 1;
  std::array<float, 3> color{0.5f, 0.5f, 0.5f};
  float density = 10.0f;

  bool contains_local(const Vec3& p) const;
  /// Radius of a sphere about the primitive origin enclosing the solid.
  double local_radius() const;
};

/// Geometry knobs for the two-plate hinge used as the analytic oracle. The
/// joint axis is z through the origin; at 0 degrees the child plate lies
/// flush on top of the root plate and it opens counter-clockwise about z.
struct HingeParams {
  double length = 0.8;     // along x, away from the axis
  double width = 0.8;      // along z
  double thickness = 0.1;  // along y
  std::array<float, 3> root_color{0.75f, 0.45f, 0.25f};
  std::array<float, 3> child_color{0.25f, 0.55f, 0.8f};
  float density = 40.0f;
};

/// Closed-form radiance-segmentation field built from solid primitives.
/// Overlaps: density is the max over containing primitives; the highest
/// part id wins segmentation and color.
class ProceduralScene final : public RadianceField {
 public:
  ProceduralScene() = default;
  ProceduralScene(int part_count, int root_part, std::vector<Primitive> primitives,
                  std::vector<JointAttributes> joints, std::array<float, 3> background = {0, 0, 0});

  static ProceduralScene hinge(double opening_deg, const HingeParams& params = {});
  static ProceduralScene from_json(const nlohmann::json& j);
  static ProceduralScene load(const std::string& path);
  nlohmann::json to_json() const;
  void save(const std::string& path) const;

  int part_count() const override { return part_count_; }
  void evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                SampleBuffer& out) const override;
  std::vector<double> rest_pose() const override { return angles_; }

  /// Copy of the scene with the joints set to `angles` (radians).
  ProceduralScene posed(const ArticulatedPose& angles) const;

  /// Analytic occupancy queries, independent of any renderer.
  float density_at(const Vec3& x) const;
  /// Winning class index at x (background when empty).
  int class_at(const Vec3& x) const;

  int root_part() const { return root_part_; }
  const std::vector<Primitive>& primitives() const { return primitives_; }
  const std::vector<JointAttributes>& joints() const { return joints_; }
  const ArticulatedPose& angles() const { return angles_; }
  const std::array<float, 3>& background() const { return background_; }
  float max_density() const;

  /// Bounding radius about the origin at the current articulation.
  double bounding_radius() const;
  /// Axis-aligned bounds at the current articulation (conservative).
  void bounds(Vec3& lo, Vec3& hi) const;

 private:
  void rebuild();
  // Index of the winning primitive at x, or -1.
  int winner(const Vec3& x, float* sigma) const;

  int part_count_ = 1;
  int root_part_ = 1;
  std::vector<Primitive> primitives_;
  std::vector<JointAttributes> joints_;
  ArticulatedPose angles_;
  std::array<float, 3> background_{0, 0, 0};
  // world -> primitive-local at the current articulation.
  std::vector<RigidTransform> world_to_local_;
};

/// Randomized hinge instance for category-level experiments.
HingeParams random_hinge_params(std::uint64_t seed);

}  // namespace clanerf

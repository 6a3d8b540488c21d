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

#include "clanerf/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "clanerf/error.hpp"
#include "clanerf/parallel.hpp"
#include "json_util.hpp"

namespace clanerf {

using nlohmann::json;

void validate_joint(const JointAttributes& joint) {
  if (!joint.axis.allFinite() || !joint.pivot.allFinite()) {
    fail(ErrorCode::kDomain, "joint attributes must be finite");
  }
  if (std::abs(joint.axis.norm() - 1.0) > 1e-9) fail(ErrorCode::kDomain, "joint axis must be unit-norm");
}

JointAttributes normalized_joint(JointAttributes joint) {
  const double n = joint.axis.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) fail(ErrorCode::kDomain, "joint axis must be nonzero");
  joint.axis /= n;
  validate_joint(joint);
  return joint;
}

bool Primitive::contains_local(const Vec3& p) const {
  switch (shape) {
    case PrimitiveShape::kBox:
      return std::abs(p.x()) <= size.x() && std::abs(p.y()) <= size.y() && std::abs(p.z()) <= size.z();
    case PrimitiveShape::kSphere:
      return p.squaredNorm() <= size.x() * size.x();
    case PrimitiveShape::kCylinder:
      return p.x() * p.x() + p.y() * p.y() <= size.x() * size.x() && std::abs(p.z()) <= size.z();
  }
  return false;
}

double Primitive::local_radius() const {
  switch (shape) {
    case PrimitiveShape::kBox:
      return size.norm();
    case PrimitiveShape::kSphere:
      return size.x();
    case PrimitiveShape::kCylinder:
      return std::hypot(size.x(), size.z());
  }
  return 0.0;
}

ProceduralScene::ProceduralScene(int part_count, int root_part, std::vector<Primitive> primitives,
                                 std::vector<JointAttributes> joints, std::array<float, 3> background)
    : part_count_(part_count), root_part_(root_part), primitives_(std::move(primitives)),
      joints_(std::move(joints)), background_(background) {
  if (part_count_ < 1) fail(ErrorCode::kSchema, "scene needs at least one part");
  if (root_part_ < 1 || root_part_ > part_count_) fail(ErrorCode::kSchema, "root part out of range");
  for (const auto& p : primitives_) {
    if (p.part < 1 || p.part > part_count_) fail(ErrorCode::kSchema, "primitive part id out of range");
    bool positive = p.size.x() > 0.0;
    if (p.shape == PrimitiveShape::kBox) positive = positive && p.size.y() > 0.0 && p.size.z() > 0.0;
    if (p.shape == PrimitiveShape::kCylinder) positive = positive && p.size.z() > 0.0;
    if (!positive) fail(ErrorCode::kSchema, "primitive must have positive volume");
    if (!(p.density >= 0.0f)) fail(ErrorCode::kSchema, "primitive density must be nonnegative");
  }
  if (static_cast<int>(joints_.size()) != part_count_ - 1) {
    fail(ErrorCode::kSchema, "scene needs exactly one joint per non-root part");
  }
  std::set<int> children;
  for (auto& jt : joints_) {
    jt = normalized_joint(jt);
    if (jt.child_part == root_part_ || jt.child_part < 1 || jt.child_part > part_count_) {
      fail(ErrorCode::kSchema, "joint child must be a non-root part");
    }
    if (!children.insert(jt.child_part).second) fail(ErrorCode::kSchema, "two joints drive the same part");
  }
  angles_.assign(joints_.size(), 0.0);
  rebuild();
}

void ProceduralScene::rebuild() {
  world_to_local_.clear();
  for (const auto& prim : primitives_) {
    RigidTransform to_local = prim.local_to_world.inverse();
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      if (joints_[j].child_part != prim.part) continue;
      const RigidTransform pose = rotation_about_axis(joints_[j].axis, joints_[j].pivot, angles_[j]);
      to_local = to_local.compose(pose.inverse());
    }
    world_to_local_.push_back(to_local);
  }
}

ProceduralScene ProceduralScene::posed(const ArticulatedPose& angles) const {
  if (angles.size() != joints_.size()) fail(ErrorCode::kContract, "pose length must match joint count");
  for (double a : angles) {
    if (!std::isfinite(a)) fail(ErrorCode::kDomain, "pose angles must be finite");
  }
  ProceduralScene out = *this;
  out.angles_ = angles;
  out.rebuild();
  return out;
}

int ProceduralScene::winner(const Vec3& x, float* sigma) const {
  int best = -1;
  float max_sigma = 0.0f;
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const Primitive& p = primitives_[i];
    if (!p.contains_local(world_to_local_[i].apply(x))) continue;
    max_sigma = std::max(max_sigma, p.density);
    if (best < 0 || p.part > primitives_[best].part ||
        (p.part == primitives_[best].part && p.density >= primitives_[best].density)) {
      best = static_cast<int>(i);
    }
  }
  if (sigma) *sigma = max_sigma;
  return best;
}

float ProceduralScene::density_at(const Vec3& x) const {
  float s = 0.0f;
  winner(x, &s);
  return s;
}

int ProceduralScene::class_at(const Vec3& x) const {
  const int w = winner(x, nullptr);
  return w < 0 ? background_class(part_count_) : primitives_[w].part - 1;
}

void ProceduralScene::evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                               SampleBuffer& out) const {
  check_conditioning(cond);
  if (x.size() != d.size()) fail(ErrorCode::kContract, "position/direction batch sizes differ");
  const int classes = num_classes();
  out.resize(x.size(), classes);
  for (std::size_t i = 0; i < x.size(); ++i) {
    float sigma = 0.0f;
    const int w = winner(x[i], &sigma);
    out.sigma[i] = sigma;
    float* rgb = out.rgb_at(i);
    if (w < 0) {
      rgb[0] = rgb[1] = rgb[2] = 0.0f;
      write_one_hot(out.logits_at(i), classes, background_class(part_count_));
    } else {
      const Primitive& p = primitives_[w];
      rgb[0] = p.color[0];
      rgb[1] = p.color[1];
      rgb[2] = p.color[2];
      write_one_hot(out.logits_at(i), classes, p.part - 1);
    }
  }
}

float ProceduralScene::max_density() const {
  float m = 0.0f;
  for (const auto& p : primitives_) m = std::max(m, p.density);
  return m;
}

double ProceduralScene::bounding_radius() const {
  double r = 0.0;
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const Vec3 c = world_to_local_[i].inverse().translation();
    r = std::max(r, c.norm() + primitives_[i].local_radius());
  }
  return r;
}

void ProceduralScene::bounds(Vec3& lo, Vec3& hi) const {
  lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  hi = -lo;
  for (std::size_t i = 0; i < primitives_.size(); ++i) {
    const RigidTransform to_world = world_to_local_[i].inverse();
    const Primitive& p = primitives_[i];
    if (p.shape == PrimitiveShape::kBox) {
      for (int c = 0; c < 8; ++c) {
        const Vec3 corner((c & 1 ? 1 : -1) * p.size.x(), (c & 2 ? 1 : -1) * p.size.y(),
                          (c & 4 ? 1 : -1) * p.size.z());
        const Vec3 w = to_world.apply(corner);
        lo = lo.cwiseMin(w);
        hi = hi.cwiseMax(w);
      }
    } else {
      const Vec3 c = to_world.translation();
      const Vec3 r = Vec3::Constant(p.local_radius());
      lo = lo.cwiseMin(c - r);
      hi = hi.cwiseMax(c + r);
    }
  }
  if (primitives_.empty()) {
    lo = Vec3::Constant(-1.0);
    hi = Vec3::Constant(1.0);
  }
}

ProceduralScene ProceduralScene::hinge(double opening_deg, const HingeParams& params) {
  Primitive root;
  root.shape = PrimitiveShape::kBox;
  root.size = Vec3(0.5 * params.length, 0.5 * params.thickness, 0.5 * params.width);
  root.local_to_world = RigidTransform(Mat3::Identity(), Vec3(0.5 * params.length, -0.5 * params.thickness, 0.0));
  root.part = 1;
  root.color = params.root_color;
  root.density = params.density;

  Primitive child = root;
  child.local_to_world = RigidTransform(Mat3::Identity(), Vec3(0.5 * params.length, 0.5 * params.thickness, 0.0));
  child.part = 2;
  child.color = params.child_color;

  JointAttributes joint;
  joint.axis = Vec3::UnitZ();
  joint.pivot = Vec3::Zero();
  joint.child_part = 2;
  ProceduralScene scene(2, 1, {root, child}, {joint});
  return scene.posed({deg_to_rad(opening_deg)});
}

HingeParams random_hinge_params(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x51);
  auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
  HingeParams p;
  p.length = u(0.6, 0.9);
  p.width = u(0.6, 0.9);
  p.thickness = u(0.08, 0.14);
  for (auto& c : p.root_color) c = static_cast<float>(u(0.2, 0.9));
  for (auto& c : p.child_color) c = static_cast<float>(u(0.2, 0.9));
  return p;
}

namespace {

const char* shape_name(PrimitiveShape s) {
  switch (s) {
    case PrimitiveShape::kBox: return "box";
    case PrimitiveShape::kSphere: return "sphere";
    case PrimitiveShape::kCylinder: return "cylinder";
  }
  return "box";
}

json transform_json(const RigidTransform& t) {
  const Eigen::AngleAxisd aa(t.rotation());
  json j;
  j["center"] = json_util::to_array(t.translation());
  if (aa.angle() != 0.0) {
    j["rotation"] = {{"axis", json_util::to_array(aa.axis())}, {"angle_deg", rad_to_deg(aa.angle())}};
  }
  return j;
}

}  // namespace

ProceduralScene ProceduralScene::from_json(const json& j) {
  using namespace json_util;
  const std::string where = "scene";
  const int parts = integer(j, "parts", where);
  const int root = j.contains("root") ? integer(j, "root", where) : 1;
  std::array<float, 3> background{0, 0, 0};
  if (j.contains("background")) background = rgb(j, "background", where);

  std::vector<Primitive> prims;
  const json& jp = need(j, "primitives", where);
  if (!jp.is_array()) fail(ErrorCode::kSchema, "scene: \"primitives\" must be an array");
  for (std::size_t i = 0; i < jp.size(); ++i) {
    const json& e = jp[i];
    const std::string w = "scene.primitives[" + std::to_string(i) + "]";
    Primitive p;
    const std::string type = string(e, "type", w);
    if (type == "box") {
      p.shape = PrimitiveShape::kBox;
      p.size = vec3(e, "half_extents", w);
    } else if (type == "sphere") {
      p.shape = PrimitiveShape::kSphere;
      p.size = Vec3(number(e, "radius", w), 0, 0);
    } else if (type == "cylinder") {
      p.shape = PrimitiveShape::kCylinder;
      p.size = Vec3(number(e, "radius", w), 0, number(e, "half_height", w));
    } else {
      fail(ErrorCode::kSchema, w + ": unknown primitive type \"" + type + "\"");
    }
    Mat3 rot = Mat3::Identity();
    if (e.contains("rotation")) {
      const json& r = e.at("rotation");
      const Vec3 axis = vec3(r, "axis", w + ".rotation");
      rot = rotation_about_axis(axis, Vec3::Zero(), deg_to_rad(number(r, "angle_deg", w + ".rotation"))).rotation();
    }
    p.local_to_world = RigidTransform(rot, vec3(e, "center", w));
    p.part = integer(e, "part", w);
    p.color = rgb(e, "color", w);
    p.density = static_cast<float>(number(e, "density", w));
    prims.push_back(p);
  }

  std::vector<JointAttributes> joints;
  if (j.contains("joints")) {
    const json& jj = j.at("joints");
    if (!jj.is_array()) fail(ErrorCode::kSchema, "scene: \"joints\" must be an array");
    for (std::size_t i = 0; i < jj.size(); ++i) {
      const std::string w = "scene.joints[" + std::to_string(i) + "]";
      JointAttributes jt;
      jt.axis = vec3(jj[i], "axis", w);
      jt.pivot = vec3(jj[i], "pivot", w);
      jt.child_part = integer(jj[i], "child", w);
      joints.push_back(jt);
    }
  }
  ProceduralScene scene(parts, root, std::move(prims), std::move(joints), background);
  if (j.contains("articulation_deg")) {
    const auto deg = numbers(j.at("articulation_deg"), scene.joints().size(), "scene: \"articulation_deg\"");
    ArticulatedPose a;
    for (double v : deg) a.push_back(deg_to_rad(v));
    scene = scene.posed(a);
  }
  return scene;
}

ProceduralScene ProceduralScene::load(const std::string& path) {
  return from_json(json_util::read_file(path));
}

json ProceduralScene::to_json() const {
  json j;
  j["parts"] = part_count_;
  j["root"] = root_part_;
  j["background"] = json_util::to_array(background_);
  j["primitives"] = json::array();
  for (const auto& p : primitives_) {
    json e = transform_json(p.local_to_world);
    e["type"] = shape_name(p.shape);
    switch (p.shape) {
      case PrimitiveShape::kBox: e["half_extents"] = json_util::to_array(p.size); break;
      case PrimitiveShape::kSphere: e["radius"] = p.size.x(); break;
      case PrimitiveShape::kCylinder:
        e["radius"] = p.size.x();
        e["half_height"] = p.size.z();
        break;
    }
    e["part"] = p.part;
    e["color"] = json_util::to_array(p.color);
    e["density"] = p.density;
    j["primitives"].push_back(e);
  }
  j["joints"] = json::array();
  for (const auto& jt : joints_) {
    j["joints"].push_back({{"axis", json_util::to_array(jt.axis)},
                           {"pivot", json_util::to_array(jt.pivot)},
                           {"child", jt.child_part}});
  }
  json deg = json::array();
  for (double a : angles_) deg.push_back(rad_to_deg(a));
  j["articulation_deg"] = deg;
  return j;
}

void ProceduralScene::save(const std::string& path) const { json_util::write_file(path, to_json()); }

}  // namespace clanerf

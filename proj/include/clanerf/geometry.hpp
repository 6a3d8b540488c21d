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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>

namespace clanerf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Proper rigid motion x -> R x + t.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  /// Throws kDomain unless the upper-left block is a rotation within 1e-6.
  static RigidTransform from_matrix(const Mat4& m);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

  RigidTransform compose(const RigidTransform& inner) const;  // this ∘ inner
  RigidTransform inverse() const;
  Mat4 matrix() const;

  bool is_identity() const;
  bool operator==(const RigidTransform& other) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Rotation by `angle` radians about the line {pivot + s * axis}, right-handed.
RigidTransform rotation_about_axis(const Vec3& axis, const Vec3& pivot, double angle);

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
};

/// Continuous pixel coordinates; the pixel with integer index (i, j) covers
/// [i, i+1) x [j, j+1) and has its center at (i + 0.5, j + 0.5).
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

struct Projection {
  PixelCoord px;
  double depth = 0.0;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  double t_near = 0.0;
  double t_far = 1.0;

  Vec3 at(double t) const { return origin + t * direction; }
};

/// Pinhole camera, +z forward, +x right, +y down. Extrinsics map world to camera.
class Camera {
 public:
  Camera() = default;
  Camera(const Intrinsics& intrinsics, const RigidTransform& world_to_camera);

  const Intrinsics& intrinsics() const { return intrinsics_; }
  const RigidTransform& world_to_camera() const { return world_to_camera_; }
  RigidTransform camera_to_world() const { return world_to_camera_.inverse(); }
  Vec3 center() const;
  int width() const { return intrinsics_.width; }
  int height() const { return intrinsics_.height; }

  static Camera look_at(const Intrinsics& intrinsics, const Vec3& eye, const Vec3& target,
                        const Vec3& world_up = Vec3::UnitY());
  /// Square image with the given vertical field of view (degrees).
  static Intrinsics intrinsics_from_fov(int width, int height, double vertical_fov_deg);

 private:
  Intrinsics intrinsics_;
  RigidTransform world_to_camera_;
};

/// Ray through continuous pixel coordinate `px`. Throws kDomain if px lies
/// outside [0, width] x [0, height].
Ray pixel_to_ray(const Camera& camera, PixelCoord px, double t_near, double t_far);

/// Ray through the center of integer pixel (i, j).
inline Ray pixel_center_ray(const Camera& camera, int i, int j, double t_near, double t_far) {
  return pixel_to_ray(camera, {i + 0.5, j + 0.5}, t_near, t_far);
}

/// Throws kDomain when x is not strictly in front of the camera.
Projection project(const Camera& camera, const Vec3& x);

/// Non-throwing variant; returns false for points at or behind the camera plane.
bool try_project(const Camera& camera, const Vec3& x, Projection& out);

}  // namespace clanerf

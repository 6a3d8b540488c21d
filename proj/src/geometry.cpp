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

#include "clanerf/geometry.hpp"

#include <cmath>
#include <string>

#include "clanerf/error.hpp"

namespace clanerf {

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  const Mat3 r = m.topLeftCorner<3, 3>();
  const double ortho_err = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err < 1e-6) || !(std::abs(r.determinant() - 1.0) < 1e-6)) {
    fail(ErrorCode::kDomain, "matrix is not a proper rigid transform (orthonormality error " +
                                 std::to_string(ortho_err) + ")");
  }
  if (m.row(3).head<3>().cwiseAbs().maxCoeff() > 1e-9 || std::abs(m(3, 3) - 1.0) > 1e-9) {
    fail(ErrorCode::kDomain, "bottom row of a rigid transform must be (0, 0, 0, 1)");
  }
  return {r, m.topRightCorner<3, 1>()};
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
  return {rotation_ * inner.rotation_, rotation_ * inner.translation_ + translation_};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_identity() const {
  return rotation_ == Mat3::Identity() && translation_ == Vec3::Zero();
}

bool RigidTransform::operator==(const RigidTransform& other) const {
  return rotation_ == other.rotation_ && translation_ == other.translation_;
}

RigidTransform rotation_about_axis(const Vec3& axis, const Vec3& pivot, double angle) {
  const double n = axis.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    fail(ErrorCode::kDomain, "rotation axis must be a finite nonzero vector");
  }
  if (angle == 0.0) return RigidTransform::identity();
  const Mat3 r = Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
  // Conjugate by translation to the pivot: x -> R (x - v) + v.
  return {r, pivot - r * pivot};
}

Camera::Camera(const Intrinsics& intrinsics, const RigidTransform& world_to_camera)
    : intrinsics_(intrinsics), world_to_camera_(world_to_camera) {
  const auto& k = intrinsics_;
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) fail(ErrorCode::kDomain, "focal lengths must be positive");
  if (k.width < 1 || k.height < 1) fail(ErrorCode::kDomain, "image size must be positive");
  if (!(k.cx >= 0.0 && k.cx < k.width && k.cy >= 0.0 && k.cy < k.height)) {
    fail(ErrorCode::kDomain, "principal point must lie inside the image");
  }
}

Vec3 Camera::center() const {
  return -(world_to_camera_.rotation().transpose() * world_to_camera_.translation());
}

Camera Camera::look_at(const Intrinsics& intrinsics, const Vec3& eye, const Vec3& target,
                       const Vec3& world_up) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 up = world_up.normalized();
  if (std::abs(forward.dot(up)) > 1.0 - 1e-9) {
    up = std::abs(forward.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  }
  // Camera axes in world coordinates: right x down = forward.
  const Vec3 right = (-up).cross(forward).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  return Camera(intrinsics, RigidTransform(r, -(r * eye)));
}

Intrinsics Camera::intrinsics_from_fov(int width, int height, double vertical_fov_deg) {
  Intrinsics k;
  k.width = width;
  k.height = height;
  k.fy = 0.5 * height / std::tan(0.5 * deg_to_rad(vertical_fov_deg));
  k.fx = k.fy;
  k.cx = 0.5 * width;
  k.cy = 0.5 * height;
  return k;
}

Ray pixel_to_ray(const Camera& camera, PixelCoord px, double t_near, double t_far) {
  const auto& k = camera.intrinsics();
  if (!(px.u >= 0.0 && px.u <= k.width && px.v >= 0.0 && px.v <= k.height)) {
    fail(ErrorCode::kDomain, "pixel (" + std::to_string(px.u) + ", " + std::to_string(px.v) +
                                 ") outside the image");
  }
  if (!(t_near >= 0.0 && t_near < t_far)) fail(ErrorCode::kDomain, "ray bounds need 0 <= near < far");
  const Vec3 dir_cam((px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy, 1.0);
  const auto& w2c = camera.world_to_camera();
  Ray ray;
  ray.origin = camera.center();
  ray.direction = (w2c.rotation().transpose() * dir_cam).normalized();
  ray.t_near = t_near;
  ray.t_far = t_far;
  return ray;
}

bool try_project(const Camera& camera, const Vec3& x, Projection& out) {
  const Vec3 p = camera.world_to_camera().apply(x);
  if (!(p.z() > 0.0)) return false;
  const auto& k = camera.intrinsics();
  out.px.u = k.fx * p.x() / p.z() + k.cx;
  out.px.v = k.fy * p.y() / p.z() + k.cy;
  out.depth = p.z();
  return true;
}

Projection project(const Camera& camera, const Vec3& x) {
  Projection out;
  if (!try_project(camera, x, out)) fail(ErrorCode::kDomain, "point is behind the camera");
  return out;
}

}  // namespace clanerf

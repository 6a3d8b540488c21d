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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "clanerf/field.hpp"
#include "clanerf/joint.hpp"
#include "clanerf/renderer.hpp"

namespace clanerf {

/// Points sampled where the predicted part label changes along a ray.
struct IntersectionSet {
  std::vector<Vec3> points;
  std::vector<std::uint64_t> pixel_ids;  // camera * width * height + row * width + column
  std::vector<int> classes;              // part class at each point
  double threshold = 0.0;                // density threshold that was applied
};

struct JointEstimate {
  JointAttributes joint;
  std::size_t inliers = 0;
  double residual = 0.0;  // RMS point-to-line distance over inliers
};

/// Marches every pixel ray of every camera with config.k_coarse samples and
/// keeps x_k when the argmax part labels at k and k + 1 are different parts
/// (background transitions are silhouettes, not joints) and sigma_k >= H.
/// Without an explicit threshold H is half the largest density seen.
/// Throws kNoBoundary when nothing is collected, kInvalidArgument for H <= 0.
IntersectionSet collect_intersections(const RadianceField& field, std::span<const Camera> cameras,
                                      const RenderConfig& config, std::optional<double> threshold,
                                      const Conditioner* cond = nullptr);

struct LineFitOptions {
  bool trim = true;
  double trim_fraction = 0.1;
  double min_eigen_ratio = 1.5;
};

/// Total-least-squares 3D line. Throws kDegenerate for fewer than two
/// distinct points and kAmbiguousAxis when the top two covariance
/// eigenvalues are within min_eigen_ratio of each other.
JointEstimate fit_line(std::span<const Vec3> points, const LineFitOptions& options = {});

/// collect_intersections followed by fit_line. The child part is the most
/// frequent non-root class among the collected points.
JointEstimate estimate_joint(const RadianceField& field, std::span<const Camera> cameras,
                             const RenderConfig& config, std::optional<double> threshold,
                             const Conditioner* cond = nullptr, const LineFitOptions& options = {});

}  // namespace clanerf

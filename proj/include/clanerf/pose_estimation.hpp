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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "clanerf/articulation.hpp"
#include "clanerf/image.hpp"

namespace clanerf {

struct PoseOptConfig {
  double a_min = 0.0;                // radians
  double a_max = kPi / 2;            // radians
  int restarts = 4;
  std::vector<double> initial;       // explicit starting angles; overrides the restart schedule
  int max_iters = 100;
  double tol = deg_to_rad(0.02);     // stop once an accepted step is shorter than this
  double h = deg_to_rad(0.25);       // finite-difference step
  double first_step = deg_to_rad(5.0);
  int batch = 1024;                  // rays per iteration
  std::uint64_t seed = 0;
  std::size_t joint = 0;             // index of the joint being estimated
};

/// Everything the inverse-rendering objective needs. Joints other than
/// `opt.joint` are held at `base_pose`.
struct PoseProblem {
  const RadianceField* field = nullptr;
  const Conditioner* cond = nullptr;
  Image target;
  Camera camera;
  std::vector<JointAttributes> joints;
  ArticulatedPose base_pose;  // empty: the field's rest pose
  RenderConfig render;
  PoseOptConfig opt;

  void validate() const;
};

/// Pixel indices (row-major) forming one ray batch.
using RayBatch = std::vector<std::uint32_t>;

/// Batch `iteration` of the seeded stream; all pixels when the batch covers the image.
RayBatch draw_batch(const PoseProblem& problem, std::uint64_t stream);
RayBatch full_batch(const PoseProblem& problem);

/// Mean squared color error over the batch between the articulated render at
/// angle `a` and the target.
double pose_loss(double a, const PoseProblem& problem, const RayBatch& batch);

/// Central difference with step h on a fixed batch, one-sided within h of a bound.
double pose_gradient(double a, const PoseProblem& problem, const RayBatch& batch, double h);

struct RestartTrace {
  double initial = 0.0;
  std::vector<double> angles;
  std::vector<double> losses;  // batch loss at each accepted iterate
  double final_angle = 0.0;
  double full_loss = 0.0;      // full-image loss at final_angle
  bool converged = false;
};

struct PoseEstimate {
  double angle = 0.0;  // radians
  double loss = 0.0;   // full-image loss
  bool converged = false;
  std::size_t best_restart = 0;
  std::vector<RestartTrace> traces;
};

PoseEstimate estimate_pose(const PoseProblem& problem);

/// Writes one CSV row per iteration: restart, iteration, angle_deg, loss.
void save_pose_trace(const std::string& path, const PoseEstimate& estimate);

/// |a_hat - a*| over a grid of source (rest) and target articulations.
struct Heatmap {
  std::vector<double> sources;    // radians
  std::vector<double> targets;    // radians
  std::vector<double> estimates;  // radians, row-major source x target
  std::vector<double> errors;     // radians, row-major source x target

  double error(std::size_t s, std::size_t t) const { return errors[s * targets.size() + t]; }
};

/// Supplies the field whose rest pose is the given source angle.
using SourceFieldFn = std::function<std::shared_ptr<const RadianceField>(double source)>;
/// Supplies the observed image at the given target angle.
using TargetImageFn = std::function<Image(double target)>;

/// Runs estimate_pose for every (source, target) cell. Settings other than the
/// field and target image come from `base`.
Heatmap error_heatmap(const std::vector<double>& sources, const std::vector<double>& targets,
                      const SourceFieldFn& field_for, const TargetImageFn& target_for, const PoseProblem& base);

/// CSV with degrees: header row of targets, one row per source.
void save_heatmap_csv(const std::string& path, const Heatmap& heatmap);
/// Color-mapped heatmap, `cell` pixels per cell, black (low) to yellow (high).
Image heatmap_image(const Heatmap& heatmap, int cell = 32);

}  // namespace clanerf

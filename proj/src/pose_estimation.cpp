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

#include "clanerf/pose_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "clanerf/error.hpp"

namespace clanerf {

void PoseProblem::validate() const {
  if (!field) fail(ErrorCode::kInvalidArgument, "pose problem has no field");
  if (target.width() != camera.width() || target.height() != camera.height() || target.channels() != 3) {
    fail(ErrorCode::kInvalidArgument, "target must be an RGB image matching the camera");
  }
  if (!std::isfinite(opt.a_min) || !std::isfinite(opt.a_max) || !(opt.a_max > opt.a_min)) {
    fail(ErrorCode::kInvalidArgument, "angle bounds must be finite with a_min < a_max");
  }
  if (opt.batch < 1) fail(ErrorCode::kInvalidArgument, "batch size must be positive");
  if (opt.restarts < 1 && opt.initial.empty()) fail(ErrorCode::kInvalidArgument, "need at least one restart");
  if (opt.joint >= joints.size()) fail(ErrorCode::kInvalidArgument, "joint index out of range");
  if (!(opt.h > 0.0) || !(opt.tol > 0.0) || opt.max_iters < 1) {
    fail(ErrorCode::kInvalidArgument, "step, tolerance and iteration count must be positive");
  }
  render.validate();
}

RayBatch full_batch(const PoseProblem& problem) {
  RayBatch b(problem.target.pixel_count());
  std::iota(b.begin(), b.end(), 0u);
  return b;
}

RayBatch draw_batch(const PoseProblem& problem, std::uint64_t stream) {
  const std::size_t n = problem.target.pixel_count();
  if (static_cast<std::size_t>(problem.opt.batch) >= n) return full_batch(problem);
  Rng rng = make_rng(problem.opt.seed ^ 0x9e3779b97f4a7c15ULL, stream);
  RayBatch b(problem.opt.batch);
  for (auto& p : b) p = static_cast<std::uint32_t>(uniform01(rng) * static_cast<double>(n));
  return b;
}

namespace {

ArticulatedPose pose_at(double a, const PoseProblem& p) {
  ArticulatedPose pose = p.base_pose.empty() ? p.field->rest_pose() : p.base_pose;
  if (pose.size() != p.joints.size()) fail(ErrorCode::kContract, "base pose length must equal the joint count");
  pose[p.opt.joint] = a;
  return pose;
}

}  // namespace

double pose_loss(double a, const PoseProblem& problem, const RayBatch& batch) {
  if (batch.empty()) fail(ErrorCode::kInvalidArgument, "empty ray batch");
  const int w = problem.camera.width();
  std::vector<Ray> rays;
  std::vector<std::uint64_t> ids;
  rays.reserve(batch.size());
  for (std::uint32_t p : batch) {
    rays.push_back(pixel_center_ray(problem.camera, static_cast<int>(p % w), static_cast<int>(p / w),
                                    problem.render.t_near, problem.render.t_far));
    ids.push_back(p);
  }
  std::vector<PixelResult> px(rays.size());
  render_rays_articulated(*problem.field, rays, ids, pose_at(a, problem), problem.joints, problem.render,
                          problem.cond, px);
  double sum = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const int i = static_cast<int>(batch[r] % w);
    const int j = static_cast<int>(batch[r] / w);
    for (int c = 0; c < 3; ++c) {
      const double e = px[r].color[c] - problem.target.at(i, j, c);
      sum += e * e;
    }
  }
  return sum / (3.0 * static_cast<double>(batch.size()));
}

double pose_gradient(double a, const PoseProblem& problem, const RayBatch& batch, double h) {
  const double lo = problem.opt.a_min;
  const double hi = problem.opt.a_max;
  if (a - h < lo) return (pose_loss(a + h, problem, batch) - pose_loss(a, problem, batch)) / h;
  if (a + h > hi) return (pose_loss(a, problem, batch) - pose_loss(a - h, problem, batch)) / h;
  return (pose_loss(a + h, problem, batch) - pose_loss(a - h, problem, batch)) / (2.0 * h);
}

namespace {

RestartTrace descend(const PoseProblem& problem, double init, std::size_t restart) {
  const auto& opt = problem.opt;
  RestartTrace tr;
  tr.initial = init;
  double a = std::clamp(init, opt.a_min, opt.a_max);
  double eta = -1.0;  // set from the first gradient
  for (int it = 0; it < opt.max_iters; ++it) {
    const RayBatch batch = draw_batch(problem, (static_cast<std::uint64_t>(restart) << 32) | std::uint32_t(it));
    const double loss = pose_loss(a, problem, batch);
    if (!std::isfinite(loss)) fail(ErrorCode::kNumeric, "pose loss is not finite");
    tr.angles.push_back(a);
    tr.losses.push_back(loss);
    const double g = pose_gradient(a, problem, batch, opt.h);
    if (g == 0.0) {
      tr.converged = true;
      break;
    }
    if (eta < 0.0) eta = opt.first_step / std::abs(g);
    bool accepted = false;
    double step = 0.0;
    while (true) {
      const double trial = std::clamp(a - eta * g, opt.a_min, opt.a_max);
      step = std::abs(trial - a);
      if (step < opt.tol) break;
      if (pose_loss(trial, problem, batch) < loss) {
        a = trial;
        accepted = true;
        eta *= 1.5;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted || step < opt.tol) {
      tr.converged = true;
      break;
    }
  }
  tr.final_angle = a;
  tr.full_loss = pose_loss(a, problem, full_batch(problem));
  return tr;
}

}  // namespace

PoseEstimate estimate_pose(const PoseProblem& problem) {
  problem.validate();
  const auto& opt = problem.opt;
  std::vector<double> starts = opt.initial;
  if (starts.empty()) {
    for (int r = 0; r < opt.restarts; ++r) {
      starts.push_back(opt.a_min + (r + 0.5) * (opt.a_max - opt.a_min) / opt.restarts);
    }
  }
  PoseEstimate est;
  for (std::size_t r = 0; r < starts.size(); ++r) est.traces.push_back(descend(problem, starts[r], r));
  for (std::size_t r = 1; r < est.traces.size(); ++r) {
    if (est.traces[r].full_loss < est.traces[est.best_restart].full_loss) est.best_restart = r;
  }
  const RestartTrace& best = est.traces[est.best_restart];
  est.angle = best.final_angle;
  est.loss = best.full_loss;
  est.converged = best.converged;
  return est;
}

void save_pose_trace(const std::string& path, const PoseEstimate& estimate) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.precision(17);
  out << "restart,iteration,angle_deg,loss\n";
  for (std::size_t r = 0; r < estimate.traces.size(); ++r) {
    const auto& tr = estimate.traces[r];
    for (std::size_t i = 0; i < tr.angles.size(); ++i) {
      out << r << ',' << i << ',' << rad_to_deg(tr.angles[i]) << ',' << tr.losses[i] << '\n';
    }
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

Heatmap error_heatmap(const std::vector<double>& sources, const std::vector<double>& targets,
                      const SourceFieldFn& field_for, const TargetImageFn& target_for, const PoseProblem& base) {
  if (sources.empty() || targets.empty()) fail(ErrorCode::kInvalidArgument, "heatmap grids must be nonempty");
  for (double a : sources) {
    if (a < base.opt.a_min || a > base.opt.a_max) fail(ErrorCode::kInvalidArgument, "source angle out of bounds");
  }
  for (double a : targets) {
    if (a < base.opt.a_min || a > base.opt.a_max) fail(ErrorCode::kInvalidArgument, "target angle out of bounds");
  }
  Heatmap hm;
  hm.sources = sources;
  hm.targets = targets;
  std::vector<Image> images;
  for (double t : targets) images.push_back(target_for(t));
  for (double s : sources) {
    const auto field = field_for(s);
    for (std::size_t t = 0; t < targets.size(); ++t) {
      PoseProblem p = base;
      p.field = field.get();
      p.target = images[t];
      p.base_pose.clear();
      const PoseEstimate est = estimate_pose(p);
      hm.estimates.push_back(est.angle);
      hm.errors.push_back(std::abs(est.angle - targets[t]));
    }
  }
  return hm;
}

void save_heatmap_csv(const std::string& path, const Heatmap& hm) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.precision(10);
  out << "source_deg\\target_deg";
  for (double t : hm.targets) out << ',' << rad_to_deg(t);
  out << '\n';
  for (std::size_t s = 0; s < hm.sources.size(); ++s) {
    out << rad_to_deg(hm.sources[s]);
    for (std::size_t t = 0; t < hm.targets.size(); ++t) out << ',' << rad_to_deg(hm.error(s, t));
    out << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

Image heatmap_image(const Heatmap& hm, int cell) {
  if (cell < 1) fail(ErrorCode::kInvalidArgument, "cell size must be positive");
  const int rows = static_cast<int>(hm.sources.size());
  const int cols = static_cast<int>(hm.targets.size());
  const double top = std::max(1e-12, *std::max_element(hm.errors.begin(), hm.errors.end()));
  Image img(cols * cell, rows * cell, 3);
  for (int s = 0; s < rows; ++s) {
    for (int t = 0; t < cols; ++t) {
      const float v = static_cast<float>(std::clamp(hm.error(s, t) / top, 0.0, 1.0));
      const float rgb[3] = {std::min(1.0f, 2.0f * v), std::max(0.0f, 2.0f * v - 1.0f), 0.0f};
      for (int y = s * cell; y < (s + 1) * cell; ++y) {
        for (int x = t * cell; x < (t + 1) * cell; ++x) {
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
        }
      }
    }
  }
  return img;
}

}  // namespace clanerf

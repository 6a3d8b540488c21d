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

#include "clanerf/joint_estimation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "clanerf/error.hpp"

namespace clanerf {

IntersectionSet collect_intersections(const RadianceField& field, std::span<const Camera> cameras,
                                      const RenderConfig& config, std::optional<double> threshold,
                                      const Conditioner* cond) {
  config.validate();
  if (cameras.empty()) fail(ErrorCode::kInvalidArgument, "joint estimation needs at least one camera");
  if (threshold && !(*threshold > 0.0)) fail(ErrorCode::kInvalidArgument, "density threshold must be positive");
  const int K = config.k_coarse;
  const int C = field.num_classes();
  const int bg = background_class(field.part_count());

  struct RayRecord {
    std::vector<double> t;
    std::vector<float> sigma;
    std::vector<int> label;
  };
  struct CameraRecord {
    std::vector<Ray> rays;
    std::vector<RayRecord> rec;
  };
  std::vector<CameraRecord> per_cam(cameras.size());
  std::vector<float> cam_max(cameras.size(), 0.0f);

  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const Camera& cam = cameras[c];
    const std::size_t n = static_cast<std::size_t>(cam.width()) * cam.height();
    per_cam[c].rays.resize(n);
    per_cam[c].rec.resize(n);
    for (int j = 0; j < cam.height(); ++j) {
      for (int i = 0; i < cam.width(); ++i) {
        per_cam[c].rays[static_cast<std::size_t>(j) * cam.width() + i] =
            pixel_center_ray(cam, i, j, config.t_near, config.t_far);
      }
    }
    const std::size_t chunk = static_cast<std::size_t>(config.ray_chunk);
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<float> chunk_max(n_chunks, 0.0f);
    parallel_for(n_chunks, [&](std::size_t ci) {
      const std::size_t begin = ci * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      std::vector<Vec3> x, d;
      for (std::size_t r = begin; r < end; ++r) {
        Rng rng = make_rng(config.seed, c * n + r);
        auto& rec = per_cam[c].rec[r];
        rec.t = sample_stratified(config, per_cam[c].rays[r], rng);
        for (double t : rec.t) {
          x.push_back(per_cam[c].rays[r].at(t));
          d.push_back(per_cam[c].rays[r].direction);
        }
      }
      SampleBuffer buf;
      field.evaluate(x, d, cond, buf);
      float mx = 0.0f;
      for (std::size_t r = begin; r < end; ++r) {
        auto& rec = per_cam[c].rec[r];
        const std::size_t off = (r - begin) * K;
        rec.sigma.assign(buf.sigma.begin() + off, buf.sigma.begin() + off + K);
        rec.label.resize(K);
        for (int k = 0; k < K; ++k) {
          const float* lg = buf.logits_at(off + k);
          rec.label[k] = static_cast<int>(std::max_element(lg, lg + C) - lg);
          mx = std::max(mx, rec.sigma[k]);
        }
      }
      chunk_max[ci] = mx;
    });
    cam_max[c] = *std::max_element(chunk_max.begin(), chunk_max.end());
  }

  IntersectionSet out;
  out.threshold = threshold ? *threshold : 0.5 * *std::max_element(cam_max.begin(), cam_max.end());
  if (!(out.threshold > 0.0)) fail(ErrorCode::kNoBoundary, "field is empty along every ray");
  for (std::size_t c = 0; c < cameras.size(); ++c) {
    const std::size_t n = per_cam[c].rays.size();
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = per_cam[c].rec[r];
      for (int k = 0; k + 1 < K; ++k) {
        const int a = rec.label[k];
        const int b = rec.label[k + 1];
        if (a == b || a == bg || b == bg || rec.sigma[k] < out.threshold) continue;
        out.points.push_back(per_cam[c].rays[r].at(rec.t[k]));
        out.pixel_ids.push_back(c * n + r);
        out.classes.push_back(a);
      }
    }
  }
  if (out.points.empty()) {
    fail(ErrorCode::kNoBoundary, "no part-to-part boundary points above the density threshold");
  }
  return out;
}

namespace {

struct Line {
  Vec3 point;
  Vec3 dir;
};

Line principal_line(std::span<const Vec3> pts, std::span<const std::size_t> idx, double min_ratio) {
  Vec3 c = Vec3::Zero();
  for (std::size_t i : idx) c += pts[i];
  c /= static_cast<double>(idx.size());
  Mat3 cov = Mat3::Zero();
  for (std::size_t i : idx) {
    const Vec3 e = pts[i] - c;
    cov += e * e.transpose();
  }
  cov /= static_cast<double>(idx.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 ev = eig.eigenvalues();  // ascending
  if (!(ev[2] > 0.0)) fail(ErrorCode::kDegenerate, "points are coincident");
  if (ev[2] < min_ratio * ev[1]) {
    fail(ErrorCode::kAmbiguousAxis, "boundary points have no dominant direction (eigenvalue ratio " +
                                        std::to_string(ev[1] > 0 ? ev[2] / ev[1] : 0.0) + ")");
  }
  Vec3 u = eig.eigenvectors().col(2).normalized();
  Eigen::Index big = 0;
  u.cwiseAbs().maxCoeff(&big);
  if (u[big] < 0.0) u = -u;
  return {c, u};
}

double line_distance(const Line& l, const Vec3& p) {
  const Vec3 e = p - l.point;
  return (e - e.dot(l.dir) * l.dir).norm();
}

}  // namespace

JointEstimate fit_line(std::span<const Vec3> points, const LineFitOptions& options) {
  bool distinct = false;
  for (const Vec3& p : points) {
    if (!p.allFinite()) fail(ErrorCode::kDomain, "line fit points must be finite");
    if (p != points.front()) distinct = true;
  }
  if (points.size() < 2 || !distinct) fail(ErrorCode::kDegenerate, "line fit needs two distinct points");

  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  Line line = principal_line(points, idx, options.min_eigen_ratio);
  const std::size_t drop = options.trim ? static_cast<std::size_t>(options.trim_fraction * points.size()) : 0;
  if (drop > 0 && points.size() - drop >= 2) {
    std::vector<double> dist(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) dist[i] = line_distance(line, points[i]);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    idx.resize(points.size() - drop);
    std::sort(idx.begin(), idx.end());
    line = principal_line(points, idx, options.min_eigen_ratio);
  }
  JointEstimate est;
  est.joint.axis = line.dir;
  est.joint.pivot = line.point;
  est.inliers = idx.size();
  double ss = 0.0;
  for (std::size_t i : idx) ss += std::pow(line_distance(line, points[i]), 2);
  est.residual = std::sqrt(ss / static_cast<double>(idx.size()));
  return est;
}

JointEstimate estimate_joint(const RadianceField& field, std::span<const Camera> cameras,
                             const RenderConfig& config, std::optional<double> threshold,
                             const Conditioner* cond, const LineFitOptions& options) {
  const IntersectionSet set = collect_intersections(field, cameras, config, threshold, cond);
  JointEstimate est = fit_line(set.points, options);
  std::vector<std::size_t> counts(field.num_classes(), 0);
  for (int c : set.classes) ++counts[c];
  counts[0] = 0;  // root part
  const int child = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  est.joint.child_part = child + 1;
  return est;
}

}  // namespace clanerf

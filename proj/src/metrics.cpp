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

#include "clanerf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "clanerf/error.hpp"

namespace clanerf {

double psnr_from_mse(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    sum += (w[i] = std::exp(-x * x / (2.0 * kSigma * kSigma)));
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable valid-region filtering of one channel.
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h, const std::vector<double>& k) {
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < kWindow; ++t) s += k[t] * img[static_cast<std::size_t>(y) * w + x + t];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < kWindow; ++t) s += k[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

double ssim_channel(const Image& a, const Image& b, int c) {
  const int w = a.width();
  const int h = a.height();
  const auto k = gaussian_window();
  std::vector<double> x(a.pixel_count()), y(a.pixel_count()), xx(x.size()), yy(x.size()), xy(x.size());
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      const std::size_t p = static_cast<std::size_t>(j) * w + i;
      x[p] = a.at(i, j, c);
      y[p] = b.at(i, j, c);
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
  const auto mx = filter_valid(x, w, h, k), my = filter_valid(y, w, h, k);
  const auto sxx = filter_valid(xx, w, h, k), syy = filter_valid(yy, w, h, k), sxy = filter_valid(xy, w, h, k);
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double total = 0.0;
  for (std::size_t p = 0; p < mx.size(); ++p) {
    const double vx = sxx[p] - mx[p] * mx[p];
    const double vy = syy[p] - my[p] * my[p];
    const double cxy = sxy[p] - mx[p] * my[p];
    total += ((2 * mx[p] * my[p] + c1) * (2 * cxy + c2)) /
             ((mx[p] * mx[p] + my[p] * my[p] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace

ImageMetrics image_metrics(const Image& pred, const Image& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height() || pred.channels() != truth.channels() ||
      pred.empty()) {
    fail(ErrorCode::kInvalidArgument, "images must be nonempty and share dimensions");
  }
  if (pred.width() < kWindow || pred.height() < kWindow) {
    fail(ErrorCode::kInvalidArgument, "SSIM needs images of at least 11x11 pixels");
  }
  ImageMetrics m;
  double se = 0.0;
  for (std::size_t i = 0; i < pred.data().size(); ++i) {
    const double e = double(pred.data()[i]) - double(truth.data()[i]);
    se += e * e;
  }
  m.mse = se / static_cast<double>(pred.data().size());
  m.psnr = psnr_from_mse(m.mse);
  double s = 0.0;
  for (int c = 0; c < pred.channels(); ++c) s += ssim_channel(pred, truth, c);
  m.ssim = s / pred.channels();
  return m;
}

SegMetrics seg_metrics(const LabelImage& pred, const LabelImage& truth, int part_count) {
  if (pred.width != truth.width || pred.height != truth.height || truth.labels.empty()) {
    fail(ErrorCode::kInvalidArgument, "label maps must be nonempty and share dimensions");
  }
  validate_labels(pred, part_count, "predicted labels");
  validate_labels(truth, part_count, "truth labels");
  const int classes = part_count + 1;
  std::vector<std::size_t> inter(classes, 0), uni(classes, 0), present(classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i) {
    const int p = pred.labels[i];
    const int t = truth.labels[i];
    ++present[t];
    if (p == t) {
      ++correct;
      ++inter[t];
      ++uni[t];
    } else {
      ++uni[t];
      ++uni[p];
    }
  }
  SegMetrics m;
  m.pixel_accuracy = static_cast<double>(correct) / static_cast<double>(truth.labels.size());
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < classes; ++c) {
    if (present[c] == 0) continue;
    sum += static_cast<double>(inter[c]) / static_cast<double>(uni[c]);
    ++n;
  }
  m.miou = sum / n;
  return m;
}

double axis_angle_error(const Vec3& u_hat, const Vec3& u_true) {
  const double c = std::abs(u_hat.normalized().dot(u_true.normalized()));
  return std::acos(std::min(1.0, c));
}

double line_distance(const Vec3& p1, const Vec3& u1, const Vec3& p2, const Vec3& u2) {
  const Vec3 a = u1.normalized();
  const Vec3 b = u2.normalized();
  const Vec3 w = p2 - p1;
  const Vec3 n = a.cross(b);
  const double nn = n.norm();
  if (nn < 1e-12) return (w - w.dot(a) * a).norm();
  return std::abs(w.dot(n)) / nn;
}

PoseMetrics pose_metrics(double a_hat, double a_true, const JointAttributes& est, const JointAttributes& truth) {
  PoseMetrics m;
  m.a_error = std::abs(a_hat - a_true);
  m.u_error = axis_angle_error(est.axis, truth.axis);
  m.v_error = line_distance(est.pivot, est.axis, truth.pivot, truth.axis);
  return m;
}

}  // namespace clanerf

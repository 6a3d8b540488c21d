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

#include "clanerf/image.hpp"
#include "clanerf/joint.hpp"

namespace clanerf {

inline constexpr double kPsnrCap = 99.0;

struct ImageMetrics {
  double mse = 0.0;
  double psnr = 0.0;  // dB, capped at kPsnrCap
  double ssim = 0.0;
};

/// MSE over all channels, PSNR for a unit peak, and SSIM with an 11x11
/// Gaussian window (sigma 1.5, K1 = 0.01, K2 = 0.03) over fully covered
/// windows, averaged over channels. Throws kInvalidArgument on size mismatch.
ImageMetrics image_metrics(const Image& pred, const Image& truth);

double psnr_from_mse(double mse);

struct SegMetrics {
  double pixel_accuracy = 0.0;
  double miou = 0.0;  // mean over classes present in the truth map
};

SegMetrics seg_metrics(const LabelImage& pred, const LabelImage& truth, int part_count);

struct PoseMetrics {
  double a_error = 0.0;  // radians
  double u_error = 0.0;  // radians, sign invariant
  double v_error = 0.0;  // distance between the two axis lines
};

double axis_angle_error(const Vec3& u_hat, const Vec3& u_true);
double line_distance(const Vec3& p1, const Vec3& u1, const Vec3& p2, const Vec3& u2);
PoseMetrics pose_metrics(double a_hat, double a_true, const JointAttributes& est, const JointAttributes& truth);

}  // namespace clanerf

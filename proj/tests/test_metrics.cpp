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

#include "doctest.h"

#include <cmath>

#include "clanerf/metrics.hpp"
#include "support.hpp"

using namespace clanerf;
using clanerf::testing::code_of;

namespace {

Image noise_image(Rng& rng, int w, int h, int c) {
  Image img(w, h, c);
  for (auto& v : img.data()) v = static_cast<float>(uniform01(rng));
  return img;
}

LabelImage columns(int w, int h, const std::vector<std::uint8_t>& per_column) {
  LabelImage l(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) l.at(x, y) = per_column[x];
  return l;
}

}  // namespace

TEST_CASE("identical images give zero error, capped PSNR and unit SSIM") {
  Rng rng = make_rng(1, 0);
  const Image img = noise_image(rng, 24, 20, 3);
  const ImageMetrics m = image_metrics(img, img);
  CHECK(m.mse == 0.0);
  CHECK(m.psnr == kPsnrCap);
  CHECK(m.ssim == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PSNR of a uniform 0.1 offset is 20 dB") {
  const Image a(16, 16, 3, 0.25f);
  const Image b(16, 16, 3, 0.35f);
  const ImageMetrics m = image_metrics(a, b);
  CHECK(m.mse == doctest::Approx(0.01).epsilon(1e-5));
  CHECK(m.psnr == doctest::Approx(20.0).epsilon(1e-4));
  CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0));
  CHECK(psnr_from_mse(1e-3) == doctest::Approx(30.0));
  CHECK(psnr_from_mse(0.0) == kPsnrCap);
  CHECK(psnr_from_mse(1e-30) == kPsnrCap);
}

TEST_CASE("SSIM of flat images reduces to the luminance term") {
  const double a = 0.2, b = 0.6, c1 = 1e-4;
  const ImageMetrics m = image_metrics(Image(15, 13, 1, float(a)), Image(15, 13, 1, float(b)));
  CHECK(m.ssim == doctest::Approx((2 * a * b + c1) / (a * a + b * b + c1)).epsilon(1e-6));
}

TEST_CASE("SSIM of a binary image against its negative is negative") {
  Rng rng = make_rng(2, 0);
  Image img(32, 32, 3);
  Image neg(32, 32, 3);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    img.data()[i] = (rng() & 1) ? 1.0f : 0.0f;
    neg.data()[i] = 1.0f - img.data()[i];
  }
  const ImageMetrics m = image_metrics(img, neg);
  CHECK(m.ssim < 0.0);
  CHECK(m.ssim >= -1.0);
  CHECK(m.mse == doctest::Approx(1.0));
  CHECK(m.psnr == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("image metrics are symmetric and bounded") {
  Rng rng = make_rng(3, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Image a = noise_image(rng, 19, 17, 3);
    const Image b = noise_image(rng, 19, 17, 3);
    const ImageMetrics ab = image_metrics(a, b);
    const ImageMetrics ba = image_metrics(b, a);
    CHECK(ab.mse == ba.mse);
    CHECK(ab.ssim == doctest::Approx(ba.ssim).epsilon(1e-12));
    CHECK(ab.ssim <= 1.0);
    CHECK(ab.ssim >= -1.0);
    CHECK(std::isfinite(ab.psnr));
    CHECK(ab.psnr == doctest::Approx(-10.0 * std::log10(ab.mse)));
  }
}

TEST_CASE("image metrics reject mismatched or tiny inputs") {
  CHECK(code_of([] { image_metrics(Image(16, 16, 3), Image(16, 15, 3)); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { image_metrics(Image(16, 16, 3), Image(16, 16, 1)); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { image_metrics(Image(8, 8, 3), Image(8, 8, 3)); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("segmentation metrics on set-arithmetic examples") {
  const LabelImage a = columns(4, 3, {1, 1, 2, 2});
  SegMetrics m = seg_metrics(a, a, 2);
  CHECK(m.pixel_accuracy == 1.0);
  CHECK(m.miou == 1.0);

  const LabelImage swapped = columns(4, 3, {2, 2, 1, 1});
  m = seg_metrics(swapped, a, 2);
  CHECK(m.pixel_accuracy == 0.0);
  CHECK(m.miou == 0.0);

  const LabelImage shifted = columns(4, 3, {2, 1, 1, 2});
  m = seg_metrics(shifted, a, 2);
  CHECK(m.pixel_accuracy == doctest::Approx(0.5));
  CHECK(m.miou == doctest::Approx(1.0 / 3.0));

  const LabelImage with_bg = columns(4, 3, {0, 1, 2, 2});
  m = seg_metrics(with_bg, a, 2);
  CHECK(m.pixel_accuracy == doctest::Approx(0.75));
  CHECK(m.miou == doctest::Approx((0.5 + 1.0) / 2.0));
}

TEST_CASE("segmentation metrics validate their inputs") {
  const LabelImage a = columns(4, 2, {1, 1, 2, 2});
  CHECK(code_of([&] { seg_metrics(columns(4, 2, {1, 3, 2, 2}), a, 2); }) == ErrorCode::kSchema);
  CHECK(code_of([&] { seg_metrics(columns(3, 2, {1, 1, 2}), a, 2); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("pose metrics examples") {
  JointAttributes truth;
  truth.axis = Vec3::UnitZ();
  truth.pivot = Vec3(0.1, -0.2, 0.3);
  PoseMetrics m = pose_metrics(0.5, 0.5, truth, truth);
  CHECK(m.a_error == 0.0);
  CHECK(m.u_error == 0.0);
  CHECK(m.v_error == doctest::Approx(0.0).epsilon(1e-15));

  JointAttributes est = truth;
  est.axis = Vec3::UnitY();
  CHECK(pose_metrics(0.0, 0.0, est, truth).u_error == doctest::Approx(kPi / 2));

  est = truth;
  est.pivot = truth.pivot + Vec3(0.1, 0.0, 5.0);
  m = pose_metrics(deg_to_rad(31.0), deg_to_rad(30.0), est, truth);
  CHECK(m.v_error == doctest::Approx(0.1));
  CHECK(m.u_error == 0.0);
  CHECK(m.a_error == doctest::Approx(deg_to_rad(1.0)));

  CHECK(line_distance(Vec3(0, 0, 0), Vec3::UnitX(), Vec3(0, 0.7, 3), Vec3::UnitZ()) == doctest::Approx(0.7));
}

TEST_CASE("axis error is invariant to sign flips and symmetric") {
  Rng rng = make_rng(4, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a = clanerf::testing::random_unit(rng);
    const Vec3 b = clanerf::testing::random_unit(rng);
    const double e = axis_angle_error(a, b);
    CHECK(e >= 0.0);
    CHECK(e <= kPi / 2 + 1e-12);
    CHECK(axis_angle_error(-a, b) == doctest::Approx(e).epsilon(1e-12));
    CHECK(axis_angle_error(a, -b) == doctest::Approx(e).epsilon(1e-12));
    CHECK(axis_angle_error(b, a) == doctest::Approx(e).epsilon(1e-12));
    const Vec3 p = clanerf::testing::random_vec(rng);
    const Vec3 q = clanerf::testing::random_vec(rng);
    const double d = line_distance(p, a, q, b);
    CHECK(line_distance(q, b, p, a) == doctest::Approx(d).epsilon(1e-9));
    CHECK(line_distance(p + 2.0 * a, -a, q - 1.5 * b, b) == doctest::Approx(d).epsilon(1e-9));
  }
}

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

#include "clanerf/conditioning.hpp"

#include <algorithm>
#include <cmath>

#include "clanerf/error.hpp"

namespace clanerf {
namespace {

struct Plane {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  float get(int x, int y, int c) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// Binomial 5-tap blur followed by 2x decimation, edges clamped.
Plane reduce(const Plane& in) {
  static constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  Plane tmp{in.width, in.height, in.channels, std::vector<float>(in.data.size())};
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x)
      for (int c = 0; c < in.channels; ++c) {
        float s = 0.f;
        for (int t = -2; t <= 2; ++t) s += k[t + 2] * in.get(x + t, y, c);
        tmp.data[(static_cast<std::size_t>(y) * in.width + x) * in.channels + c] = s;
      }
  Plane out;
  out.width = std::max(1, in.width / 2);
  out.height = std::max(1, in.height / 2);
  out.channels = in.channels;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < in.channels; ++c) {
        float s = 0.f;
        // Center of output pixel (x, y) lies between input rows 2y and 2y + 1.
        for (int t = -2; t <= 2; ++t) {
          s += k[t + 2] * 0.25f *
               (tmp.get(2 * x, 2 * y + t, c) + tmp.get(2 * x + 1, 2 * y + t, c) +
                tmp.get(2 * x, 2 * y + 1 + t, c) + tmp.get(2 * x + 1, 2 * y + 1 + t, c));
        }
        out.data[(static_cast<std::size_t>(y) * out.width + x) * out.channels + c] = s;
      }
  return out;
}

// Bilinear lookup at continuous coordinates (pixel centers at +0.5).
float bilinear(const Plane& p, double u, double v, int c) {
  const double fx = std::clamp(u - 0.5, 0.0, double(p.width - 1));
  const double fy = std::clamp(v - 0.5, 0.0, double(p.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0;
  const double ay = fy - y0;
  const double top = (1 - ax) * p.get(x0, y0, c) + ax * p.get(x0 + 1, y0, c);
  const double bot = (1 - ax) * p.get(x0, y0 + 1, c) + ax * p.get(x0 + 1, y0 + 1, c);
  return static_cast<float>((1 - ay) * top + ay * bot);
}

}  // namespace

FeatureMap extract_features(const SourceView& view, const EncoderConfig& config) {
  const Image& img = view.image;
  if (img.width() != view.camera.width() || img.height() != view.camera.height()) {
    fail(ErrorCode::kContract, "source image size does not match its camera");
  }
  FeatureMap out;
  out.width = img.width();
  out.height = img.height();
  if (config.kind == EncoderKind::kIdentity) {
    out.channels = img.channels();
    out.data = img.data();
    return out;
  }
  if (config.levels < 1) fail(ErrorCode::kInvalidArgument, "pyramid needs at least one level");
  const int ch = img.channels();
  out.channels = ch * config.levels;
  out.data.assign(static_cast<std::size_t>(out.width) * out.height * out.channels, 0.0f);
  Plane level{img.width(), img.height(), ch, img.data()};
  for (int l = 0; l < config.levels; ++l) {
    if (l > 0) level = reduce(level);
    const double sx = double(level.width) / out.width;
    const double sy = double(level.height) / out.height;
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        for (int c = 0; c < ch; ++c) {
          out.data[(static_cast<std::size_t>(y) * out.width + x) * out.channels + l * ch + c] =
              bilinear(level, (x + 0.5) * sx, (y + 0.5) * sy, c);
        }
  }
  return out;
}

ConditioningFeature sample_feature(const FeatureMap& features, const Vec3& x, const Camera& camera) {
  ConditioningFeature out;
  out.values.assign(features.channels, 0.0f);
  Projection proj;
  if (!try_project(camera, x, proj) || !(proj.px.u >= 0.0 && proj.px.u <= features.width) ||
      !(proj.px.v >= 0.0 && proj.px.v <= features.height)) {
    out.valid = {false};
    return out;
  }
  const double fx = std::clamp(proj.px.u - 0.5, 0.0, double(features.width - 1));
  const double fy = std::clamp(proj.px.v - 0.5, 0.0, double(features.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, features.width - 1);
  const int y1 = std::min(y0 + 1, features.height - 1);
  const double ax = fx - x0;
  const double ay = fy - y0;
  const float* f00 = features.at(x0, y0);
  const float* f10 = features.at(x1, y0);
  const float* f01 = features.at(x0, y1);
  const float* f11 = features.at(x1, y1);
  for (int c = 0; c < features.channels; ++c) {
    const double top = (1 - ax) * f00[c] + ax * f10[c];
    const double bot = (1 - ax) * f01[c] + ax * f11[c];
    out.values[c] = static_cast<float>((1 - ay) * top + ay * bot);
  }
  out.valid = {true};
  return out;
}

ConditioningFeature aggregate_views(std::span<const ConditioningFeature> per_view) {
  if (per_view.empty()) fail(ErrorCode::kContract, "aggregation needs at least one view");
  const std::size_t dim = per_view.front().values.size();
  ConditioningFeature out;
  out.values.assign(dim, 0.0f);
  std::vector<double> acc(dim, 0.0);
  int count = 0;
  for (const auto& f : per_view) {
    if (f.values.size() != dim) fail(ErrorCode::kContract, "views disagree on feature dimension");
    const bool ok = std::all_of(f.valid.begin(), f.valid.end(), [](bool b) { return b; });
    out.valid.insert(out.valid.end(), f.valid.begin(), f.valid.end());
    if (!ok || f.valid.empty()) continue;
    ++count;
    for (std::size_t c = 0; c < dim; ++c) acc[c] += f.values[c];
  }
  if (count > 0) {
    for (std::size_t c = 0; c < dim; ++c) out.values[c] = static_cast<float>(acc[c] / count);
  }
  return out;
}

Conditioner::Conditioner(std::vector<SourceView> views, const EncoderConfig& config) : config_(config) {
  if (views.empty()) fail(ErrorCode::kContract, "conditioning needs at least one source view");
  for (const auto& v : views) {
    maps_.push_back(extract_features(v, config));
    cameras_.push_back(v.camera);
  }
  feature_dim_ = maps_.front().channels;
  for (const auto& m : maps_) {
    if (m.channels != feature_dim_) fail(ErrorCode::kContract, "source views differ in channel count");
  }
}

ConditioningFeature Conditioner::feature(const Vec3& x) const {
  std::vector<ConditioningFeature> per_view;
  per_view.reserve(maps_.size());
  for (std::size_t i = 0; i < maps_.size(); ++i) per_view.push_back(sample_feature(maps_[i], x, cameras_[i]));
  return aggregate_views(per_view);
}

void Conditioner::feature_into(const Vec3& x, float* out) const {
  const ConditioningFeature f = feature(x);
  std::copy(f.values.begin(), f.values.end(), out);
}

}  // namespace clanerf

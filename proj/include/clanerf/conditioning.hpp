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

#include <span>
#include <vector>

#include "clanerf/geometry.hpp"
#include "clanerf/image.hpp"

namespace clanerf {

/// An RGB observation with its camera.
struct SourceView {
  Image image;
  Camera camera;
};

enum class EncoderKind { kIdentity, kPyramid };

/// Fixed image featurizer. The pyramid encoder blurs and halves the image
/// `levels - 1` times, upsamples every level back to full resolution and
/// concatenates channels.
struct EncoderConfig {
  EncoderKind kind = EncoderKind::kPyramid;
  int levels = 3;

  int feature_dim(int image_channels = 3) const {
    return kind == EncoderKind::kIdentity ? image_channels : image_channels * levels;
  }
};

/// Per-pixel features at image resolution, interleaved channels.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;

  const float* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
};

/// Feature vector for one point plus per-view validity.
struct ConditioningFeature {
  std::vector<float> values;
  std::vector<bool> valid;  // one entry per contributing view
};

FeatureMap extract_features(const SourceView& view, const EncoderConfig& config);

/// Bilinear sample of `features` at the projection of x. Pixel centers sit at
/// half-integer coordinates; samples within half a pixel of the border clamp
/// to the edge. Points behind the camera or outside the image give a zero
/// vector with validity false.
ConditioningFeature sample_feature(const FeatureMap& features, const Vec3& x, const Camera& camera);

/// Validity-masked mean. Throws kContract for an empty list.
ConditioningFeature aggregate_views(std::span<const ConditioningFeature> per_view);

/// Source views with extracted features; computes W(pi(x)) for any point.
/// Immutable after construction and safe to share between threads.
class Conditioner {
 public:
  Conditioner(std::vector<SourceView> views, const EncoderConfig& config);

  int feature_dim() const { return feature_dim_; }
  std::size_t view_count() const { return cameras_.size(); }
  const EncoderConfig& encoder() const { return config_; }

  ConditioningFeature feature(const Vec3& x) const;
  /// Aggregated feature only; writes feature_dim() floats.
  void feature_into(const Vec3& x, float* out) const;

 private:
  EncoderConfig config_;
  int feature_dim_ = 0;
  std::vector<FeatureMap> maps_;
  std::vector<Camera> cameras_;
};

}  // namespace clanerf

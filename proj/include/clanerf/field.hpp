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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "clanerf/geometry.hpp"

namespace clanerf {

class Conditioner;

// Class indices: parts 1..P live at index 0..P-1, background at index P.
// Label images store part id p as p and background as 0.
inline int background_class(int part_count) { return part_count; }
inline std::uint8_t class_to_label(int cls, int part_count) {
  return cls == part_count ? 0 : static_cast<std::uint8_t>(cls + 1);
}
inline int label_to_class(std::uint8_t label, int part_count) {
  return label == 0 ? part_count : label - 1;
}

/// (density, color, segmentation logits) at one point.
struct RadianceSample {
  float sigma = 0.0f;
  std::array<float, 3> color{0.0f, 0.0f, 0.0f};
  std::vector<float> logits;
};

/// Structure-of-arrays batch of field outputs, 32-bit.
struct SampleBuffer {
  int classes = 0;
  std::vector<float> sigma;
  std::vector<float> rgb;     // 3 per sample
  std::vector<float> logits;  // `classes` per sample

  void resize(std::size_t n, int num_classes) {
    classes = num_classes;
    sigma.resize(n);
    rgb.resize(3 * n);
    logits.resize(n * num_classes);
  }
  std::size_t size() const { return sigma.size(); }
  const float* logits_at(std::size_t i) const { return logits.data() + i * classes; }
  float* logits_at(std::size_t i) { return logits.data() + i * classes; }
  const float* rgb_at(std::size_t i) const { return rgb.data() + 3 * i; }
  float* rgb_at(std::size_t i) { return rgb.data() + 3 * i; }
};

/// Radiance-segmentation field. Implementations are immutable once built and
/// safe to evaluate concurrently.
class RadianceField {
 public:
  virtual ~RadianceField() = default;

  /// Number of parts P (root included); there are P + 1 classes.
  virtual int part_count() const = 0;
  int num_classes() const { return part_count() + 1; }

  /// Width of the per-point conditioning feature; 0 for unconditioned fields.
  virtual int conditioning_dim() const { return 0; }

  /// Batched evaluation. `cond` must be non-null exactly when
  /// conditioning_dim() > 0; features are sampled at each x.
  virtual void evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                        SampleBuffer& out) const = 0;

  /// Field used for coarse samples in hierarchical rendering.
  virtual const RadianceField& coarse() const { return *this; }

  /// Articulation (radians, one per joint) the field represents at rest.
  virtual std::vector<double> rest_pose() const { return {}; }

 protected:
  void check_conditioning(const Conditioner* cond) const;
};

/// Single-point convenience wrapper around evaluate(). Throws kContract if d
/// is not unit-norm or the conditioning argument does not match the field.
RadianceSample eval_field(const RadianceField& field, const Vec3& x, const Vec3& d,
                          const Conditioner* cond = nullptr);

/// Logit magnitude used by analytic fields for "one-hot" segmentation.
inline constexpr float kOneHotLogit = 10.0f;

inline void write_one_hot(float* logits, int classes, int cls) {
  for (int c = 0; c < classes; ++c) logits[c] = (c == cls) ? kOneHotLogit : 0.0f;
}

}  // namespace clanerf

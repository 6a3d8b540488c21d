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

#include "clanerf/field.hpp"
#include "clanerf/geometry.hpp"
#include "clanerf/image.hpp"
#include "clanerf/parallel.hpp"

namespace clanerf {

class Conditioner;

/// Sampling and compositing settings shared by all renderers.
struct RenderConfig {
  int k_coarse = 64;
  int k_fine = 0;  // importance samples drawn from the coarse weights; 0 disables the fine pass
  double t_near = 0.5;
  double t_far = 4.0;
  bool jitter = false;  // off: bin midpoints and deterministic inverse-CDF quantiles
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
  std::uint64_t seed = 0;
  int ray_chunk = 128;  // rays per batched field evaluation

  /// Throws kInvalidArgument when the invariants do not hold.
  void validate() const;
};

/// Composited pixel: color, class distribution (P + 1 entries) and opacity.
struct PixelResult {
  std::array<double, 3> color{0.0, 0.0, 0.0};
  std::vector<double> prob;
  double alpha = 0.0;

  int label() const;  // argmax class index (lowest index on ties)
};

/// One uniform draw per equal-width bin of [ray.t_near, ray.t_far]; midpoints
/// when jitter is off. Returns config.k_coarse values.
std::vector<double> sample_stratified(const RenderConfig& config, const Ray& ray, Rng& rng);

/// Inverse-CDF draws from the piecewise-constant density proportional to
/// `weights` over the intervals [t_k, t_{k+1}] (the last ends at t_far),
/// merged with `t` and sorted. All-zero weights fall back to uniform.
std::vector<double> sample_hierarchical(std::span<const double> weights, std::span<const double> t, double t_far,
                                        int k_fine, bool jitter, Rng& rng);

/// Samples along one ray for the mixture compositor. Entry (k, g) is the
/// evaluation of group g at sample k and lives at index k * groups + g.
struct CompositeSamples {
  std::span<const double> t;
  double t_far = 1.0;
  int groups = 1;
  int classes = 2;
  std::span<const float> sigma;
  std::span<const float> rgb;
  std::span<const float> logits;
  std::span<const double> weights;  // empty: every group weighs exactly 1
};

/// Weighted mixture compositing. Throws kContract for unsorted t or
/// inconsistent buffer sizes. `sample_weights`, if given, receives the
/// per-sample compositing weight summed over groups.
PixelResult composite_mixture(const CompositeSamples& samples, const std::array<float, 3>& background,
                              std::vector<double>* sample_weights = nullptr);

/// Plain quadrature compositing of one field evaluation per sample.
PixelResult composite(std::span<const double> t, double t_far, const SampleBuffer& samples,
                      const std::array<float, 3>& background, std::vector<double>* sample_weights = nullptr);

/// Field outputs along one ray in 64-bit: sigma (K), rgb (3K), logits (classes x K).
struct DenseSamples {
  int classes = 2;
  std::span<const double> sigma;
  std::span<const double> rgb;
  std::span<const double> logits;
};

PixelResult composite(std::span<const double> t, double t_far, const DenseSamples& samples,
                      const std::array<float, 3>& background, std::vector<double>* sample_weights = nullptr);

/// Gradients of a scalar loss with respect to the per-sample field outputs.
struct CompositeGrad {
  std::vector<double> d_sigma;
  std::vector<double> d_rgb;
  std::vector<double> d_logits;
};

/// Backward pass of composite() given dL/dcolor and dL/dprob.
void composite_backward(std::span<const double> t, double t_far, const DenseSamples& samples,
                        const std::array<float, 3>& background, const std::array<double, 3>& d_color,
                        std::span<const double> d_prob, CompositeGrad& grad);
void composite_backward(std::span<const double> t, double t_far, const SampleBuffer& samples,
                        const std::array<float, 3>& background, const std::array<double, 3>& d_color,
                        std::span<const double> d_prob, CompositeGrad& grad);

/// Per-class transforms applied to sample positions before the field is
/// queried (index = class, background last). Empty means undeformed.
using ClassTransforms = std::vector<RigidTransform>;

/// Evaluates the field along a ray at fixed sample positions and composites,
/// mixing the per-class deformed evaluations when `deform` is non-empty.
PixelResult composite_deformed(const RadianceField& field, const Ray& ray, std::span<const double> t,
                               const ClassTransforms& deform, const Conditioner* cond,
                               const std::array<float, 3>& background);

/// Renders a batch of rays. Ray r draws its random numbers from the stream
/// (config.seed, ids[r]), so results do not depend on batching or threads.
void render_rays(const RadianceField& field, std::span<const Ray> rays, std::span<const std::uint64_t> ids,
                 const RenderConfig& config, const ClassTransforms& deform, const Conditioner* cond,
                 std::span<PixelResult> out);

struct RenderOutput {
  Image rgb;          // 3 channels
  LabelImage labels;  // 0 background, p for part p
  Image alpha;        // 1 channel
};

RenderOutput render_image(const RadianceField& field, const Camera& camera, const RenderConfig& config,
                          const Conditioner* cond = nullptr);

/// Renders every pixel with the given per-class transforms.
RenderOutput render_image_deformed(const RadianceField& field, const Camera& camera, const RenderConfig& config,
                                   const ClassTransforms& deform, const Conditioner* cond);

/// Packs per-pixel results (row-major) into images.
RenderOutput pack_pixels(int width, int height, int part_count, std::span<const PixelResult> pixels);

}  // namespace clanerf

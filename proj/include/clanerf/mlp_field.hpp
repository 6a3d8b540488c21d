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
#include <memory>
#include <string>
#include <vector>

#include "clanerf/conditioning.hpp"
#include "clanerf/encoding.hpp"
#include "clanerf/field.hpp"
#include "clanerf/mlp.hpp"

namespace clanerf {

struct FieldNetConfig {
  int depth = 6;
  int width = 128;
  int color_width = 64;
  int pos_bands = 8;
  int dir_bands = 4;
  int feature_dim = 0;  // conditioning channels appended to the encoded position
  int classes = 3;      // P + 1

  PositionalEncoding pos_encoding() const { return {pos_bands, true}; }
  PositionalEncoding dir_encoding() const { return {dir_bands, true}; }
  int trunk_input_dim() const { return pos_encoding().output_dim(3) + feature_dim; }
  int dir_input_dim() const { return dir_encoding().output_dim(3); }
};

/// Radiance-segmentation network: a ReLU trunk over [gamma(x), W(pi(x))],
/// a linear head for (density, logits) and a small color branch that also
/// sees gamma(d). Density goes through softplus and color through a logistic,
/// so sigma >= 0 and c in [0, 1] hold by construction.
template <typename T>
class FieldNetwork {
 public:
  using Matrix = typename Mlp<T>::Matrix;

  struct Output {
    Matrix sigma;   // 1 x N
    Matrix rgb;     // 3 x N
    Matrix logits;  // classes x N
  };

  struct Cache {
    typename Mlp<T>::Cache trunk, head, color;
  };

  FieldNetwork() = default;
  explicit FieldNetwork(const FieldNetConfig& config);

  void initialize(Rng& rng);
  const FieldNetConfig& config() const { return config_; }

  /// inputs: trunk_input_dim() x N, dirs: dir_input_dim() x N.
  Output forward(const Matrix& inputs, const Matrix& dirs) const;
  Output forward(const Matrix& inputs, const Matrix& dirs, Cache& cache) const;

  /// Accumulates parameter gradients into `grad` (layout of flat_params()).
  void backward(const Cache& cache, const Output& out, const Matrix& d_sigma, const Matrix& d_rgb,
                const Matrix& d_logits, std::span<T> grad) const;

  std::size_t param_count() const;
  /// Parameter blocks in serialization order: trunk, head, color.
  std::vector<std::span<T>> param_blocks();
  std::vector<std::span<const T>> param_blocks() const;
  std::vector<T> flat_params() const;
  void set_flat_params(std::span<const T> values);

  const Mlp<T>& trunk() const { return trunk_; }
  const Mlp<T>& head() const { return head_; }
  const Mlp<T>& color() const { return color_; }

  template <typename U>
  FieldNetwork<U> cast() const {
    FieldNetwork<U> out(config_);
    const auto src = flat_params();
    std::vector<U> dst(src.begin(), src.end());
    out.set_flat_params(dst);
    return out;
  }

 private:
  FieldNetConfig config_;
  Mlp<T> trunk_, head_, color_;
};

/// Builds the encoded trunk/direction input matrices for a batch of points.
template <typename T>
void encode_batch(const FieldNetConfig& config, std::span<const Vec3> x, std::span<const Vec3> d,
                  const Conditioner* cond, typename Mlp<T>::Matrix& inputs, typename Mlp<T>::Matrix& dirs);

/// Everything a checkpoint carries.
struct FieldModel {
  FieldNetConfig config;
  FieldNetwork<float> coarse;
  FieldNetwork<float> fine;
  std::vector<double> rest_pose;  // radians
  EncoderConfig encoder;          // meaningful when config.feature_dim > 0
  double bound_radius = 0.0;      // radius about the origin enclosing the scene; 0 when unknown
  std::array<float, 3> background{0.0f, 0.0f, 0.0f};
};

/// One network exposed as a RadianceField.
class NetworkField final : public RadianceField {
 public:
  NetworkField(std::shared_ptr<const FieldModel> model, bool use_coarse);

  int part_count() const override { return model_->config.classes - 1; }
  int conditioning_dim() const override { return model_->config.feature_dim; }
  void evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                SampleBuffer& out) const override;
  std::vector<double> rest_pose() const override { return model_->rest_pose; }

 private:
  std::shared_ptr<const FieldModel> model_;
  const FieldNetwork<float>* net_;
};

/// Coarse/fine network pair: evaluate() uses the fine network, coarse() the
/// coarse one.
class MlpField final : public RadianceField {
 public:
  explicit MlpField(std::shared_ptr<const FieldModel> model);

  int part_count() const override { return fine_.part_count(); }
  int conditioning_dim() const override { return fine_.conditioning_dim(); }
  void evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                SampleBuffer& out) const override {
    fine_.evaluate(x, d, cond, out);
  }
  const RadianceField& coarse() const override { return coarse_; }
  std::vector<double> rest_pose() const override { return model_->rest_pose; }

  const FieldModel& model() const { return *model_; }

 private:
  std::shared_ptr<const FieldModel> model_;
  NetworkField coarse_;
  NetworkField fine_;
};

// Checkpoint: "CLANERF\0" magic, u32 version, u32 header length, JSON header
// (network config, layer list, rest pose, encoder), then float32
// little-endian parameters: coarse network then fine network, each as trunk,
// head and color layers in order, W column-major (out x in) then b.
void save_checkpoint(const std::string& path, const FieldModel& model);
FieldModel load_checkpoint(const std::string& path);
bool is_checkpoint_file(const std::string& path);

}  // namespace clanerf

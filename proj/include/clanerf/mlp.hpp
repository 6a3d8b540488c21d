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

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

#include "clanerf/parallel.hpp"

namespace clanerf {

enum class Activation { kIdentity, kRelu, kSoftplus, kSigmoid };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::kRelu;
};

/// Dense feed-forward network over column batches (one sample per column).
/// Parameters live in one flat array: per layer, W (out x in, column-major)
/// followed by b (out).
template <typename T>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
  using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

  /// Activations saved by the training forward pass: outputs[0] is the input,
  /// outputs[l + 1] the post-activation output of layer l.
  struct Cache {
    std::vector<Matrix> outputs;
    const Matrix& result() const { return outputs.back(); }
  };

  Mlp() = default;
  explicit Mlp(std::vector<LayerSpec> layers);

  /// Uniform fan-in scaled initialization (He for ReLU, Glorot otherwise); zero biases.
  void initialize(Rng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  std::size_t param_count() const { return params_.size(); }

  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }

  MatrixMap weight(std::size_t l);
  ConstMatrixMap weight(std::size_t l) const;
  VectorMap bias(std::size_t l);
  ConstVectorMap bias(std::size_t l) const;

  /// Throws kContract if x.rows() != input_dim().
  Matrix forward(const Matrix& x) const;
  void forward(const Matrix& x, Cache& cache) const;

  /// Accumulates dL/dparams into `grad` (same layout as params()). If d_input
  /// is non-null it receives dL/dx.
  void backward(const Cache& cache, const Matrix& d_output, std::span<T> grad, Matrix* d_input) const;

  template <typename U>
  Mlp<U> cast() const {
    Mlp<U> out(layers_);
    auto dst = out.params();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;  // start of W for each layer
  std::vector<T> params_;
};

/// In-place activation and its derivative expressed through the activation output.
template <typename T>
void apply_activation(Activation act, Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& z);

template <typename T>
void multiply_activation_grad(Activation act, const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& y,
                              Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& grad);

template <typename T>
T softplus(T z);

/// Adaptive-moment optimizer state over a flat parameter array.
template <typename T>
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-7)
      : beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<T> params, std::span<const T> grad, double lr);
  long steps() const { return t_; }

 private:
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-7;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace clanerf

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

#include "clanerf/mlp.hpp"

#include <cmath>
#include <string>

#include "clanerf/error.hpp"

namespace clanerf {

template <typename T>
T softplus(T z) {
  // log(1 + e^z) without overflow.
  return z > T(20) ? z : std::log1p(std::exp(z));
}

template <typename T>
void apply_activation(Activation act, Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& z) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      z = z.cwiseMax(T(0));
      break;
    case Activation::kSoftplus:
      z = z.unaryExpr([](T v) { return softplus(v); });
      break;
    case Activation::kSigmoid:
      z = z.unaryExpr([](T v) { return T(1) / (T(1) + std::exp(-v)); });
      break;
  }
}

template <typename T>
void multiply_activation_grad(Activation act, const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& y,
                              Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& grad) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      grad = (y.array() > T(0)).select(grad, T(0));
      break;
    case Activation::kSoftplus:
      // d softplus(z)/dz = sigmoid(z) = 1 - exp(-softplus(z)).
      grad.array() *= -(-y.array()).exp() + T(1);
      break;
    case Activation::kSigmoid:
      grad.array() *= y.array() * (T(1) - y.array());
      break;
  }
}

template <typename T>
Mlp<T>::Mlp(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  std::size_t n = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l];
    if (s.in < 1 || s.out < 1) fail(ErrorCode::kContract, "layer dimensions must be positive");
    if (l > 0 && layers_[l - 1].out != s.in) {
      fail(ErrorCode::kContract, "layer " + std::to_string(l) + " input does not match previous output");
    }
    offsets_.push_back(n);
    n += static_cast<std::size_t>(s.in) * s.out + s.out;
  }
  params_.assign(n, T(0));
}

template <typename T>
void Mlp<T>::initialize(Rng& rng) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l];
    const double limit = s.act == Activation::kRelu ? std::sqrt(6.0 / s.in) : std::sqrt(6.0 / (s.in + s.out));
    auto w = weight(l);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>((2.0 * uniform01(rng) - 1.0) * limit);
    bias(l).setZero();
  }
}

template <typename T>
typename Mlp<T>::MatrixMap Mlp<T>::weight(std::size_t l) {
  return MatrixMap(params_.data() + offsets_[l], layers_[l].out, layers_[l].in);
}

template <typename T>
typename Mlp<T>::ConstMatrixMap Mlp<T>::weight(std::size_t l) const {
  return ConstMatrixMap(params_.data() + offsets_[l], layers_[l].out, layers_[l].in);
}

template <typename T>
typename Mlp<T>::VectorMap Mlp<T>::bias(std::size_t l) {
  return VectorMap(params_.data() + offsets_[l] + std::size_t(layers_[l].out) * layers_[l].in, layers_[l].out);
}

template <typename T>
typename Mlp<T>::ConstVectorMap Mlp<T>::bias(std::size_t l) const {
  return ConstVectorMap(params_.data() + offsets_[l] + std::size_t(layers_[l].out) * layers_[l].in,
                        layers_[l].out);
}

template <typename T>
typename Mlp<T>::Matrix Mlp<T>::forward(const Matrix& x) const {
  if (x.rows() != input_dim()) fail(ErrorCode::kContract, "MLP input has wrong feature dimension");
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = weight(l) * h;
    z.colwise() += bias(l);
    apply_activation(layers_[l].act, z);
    h.swap(z);
  }
  return h;
}

template <typename T>
void Mlp<T>::forward(const Matrix& x, Cache& cache) const {
  if (x.rows() != input_dim()) fail(ErrorCode::kContract, "MLP input has wrong feature dimension");
  cache.outputs.resize(layers_.size() + 1);
  cache.outputs[0] = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix& z = cache.outputs[l + 1];
    z.noalias() = weight(l) * cache.outputs[l];
    z.colwise() += bias(l);
    apply_activation(layers_[l].act, z);
  }
}

template <typename T>
void Mlp<T>::backward(const Cache& cache, const Matrix& d_output, std::span<T> grad, Matrix* d_input) const {
  if (grad.size() != params_.size()) fail(ErrorCode::kContract, "gradient buffer size mismatch");
  if (cache.outputs.size() != layers_.size() + 1) fail(ErrorCode::kContract, "cache does not match network");
  const Matrix& last = cache.outputs.back();
  if (d_output.rows() != last.rows() || d_output.cols() != last.cols()) {
    fail(ErrorCode::kContract, "upstream gradient shape mismatch");
  }
  Matrix delta = d_output;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    multiply_activation_grad(layers_[li].act, cache.outputs[li + 1], delta);
    const Matrix& in = cache.outputs[li];
    MatrixMap gw(grad.data() + offsets_[li], layers_[li].out, layers_[li].in);
    VectorMap gb(grad.data() + offsets_[li] + std::size_t(layers_[li].out) * layers_[li].in, layers_[li].out);
    const Matrix dw = delta * in.transpose();
    const Eigen::Matrix<T, Eigen::Dynamic, 1> db = delta.rowwise().sum();
    gw += dw;
    gb += db;
    if (li > 0 || d_input) {
      Matrix prev = weight(li).transpose() * delta;
      delta.swap(prev);
    }
  }
  if (d_input) *d_input = std::move(delta);
}

template <typename T>
void Adam<T>::step(std::span<T> params, std::span<const T> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    fail(ErrorCode::kContract, "optimizer state size mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
    const double mh = m_[i] / c1;
    const double vh = v_[i] / c2;
    params[i] = static_cast<T>(params[i] - lr * mh / (std::sqrt(vh) + eps_));
  }
}

template float softplus<float>(float);
template double softplus<double>(double);
template void apply_activation<float>(Activation, Eigen::MatrixXf&);
template void apply_activation<double>(Activation, Eigen::MatrixXd&);
template void multiply_activation_grad<float>(Activation, const Eigen::MatrixXf&, Eigen::MatrixXf&);
template void multiply_activation_grad<double>(Activation, const Eigen::MatrixXd&, Eigen::MatrixXd&);
template class Mlp<float>;
template class Mlp<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace clanerf

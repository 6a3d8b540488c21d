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

#include "clanerf/mlp_field.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "clanerf/error.hpp"
#include "json_util.hpp"

namespace clanerf {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'N', 'E', 'R', 'F', '\0'};
constexpr std::uint32_t kVersion = 1;

std::vector<LayerSpec> trunk_layers(const FieldNetConfig& c) {
  std::vector<LayerSpec> out;
  int in = c.trunk_input_dim();
  for (int i = 0; i < c.depth; ++i) {
    out.push_back({in, c.width, Activation::kRelu});
    in = c.width;
  }
  return out;
}

}  // namespace

template <typename T>
FieldNetwork<T>::FieldNetwork(const FieldNetConfig& config)
    : config_(config),
      trunk_(trunk_layers(config)),
      head_({{config.width, 1 + config.classes, Activation::kIdentity}}),
      color_({{config.width + config.dir_input_dim(), config.color_width, Activation::kRelu},
              {config.color_width, 3, Activation::kSigmoid}}) {
  if (config.depth < 1 || config.width < 1 || config.classes < 2) {
    fail(ErrorCode::kContract, "network needs depth >= 1, width >= 1 and at least two classes");
  }
}

template <typename T>
void FieldNetwork<T>::initialize(Rng& rng) {
  trunk_.initialize(rng);
  head_.initialize(rng);
  color_.initialize(rng);
}

template <typename T>
typename FieldNetwork<T>::Output FieldNetwork<T>::forward(const Matrix& inputs, const Matrix& dirs) const {
  Cache cache;
  return forward(inputs, dirs, cache);
}

template <typename T>
typename FieldNetwork<T>::Output FieldNetwork<T>::forward(const Matrix& inputs, const Matrix& dirs,
                                                          Cache& cache) const {
  if (dirs.rows() != config_.dir_input_dim() || dirs.cols() != inputs.cols()) {
    fail(ErrorCode::kContract, "direction encoding has the wrong shape");
  }
  trunk_.forward(inputs, cache.trunk);
  const Matrix& h = cache.trunk.result();
  head_.forward(h, cache.head);
  Matrix color_in(h.rows() + dirs.rows(), h.cols());
  color_in.topRows(h.rows()) = h;
  color_in.bottomRows(dirs.rows()) = dirs;
  color_.forward(color_in, cache.color);

  Output out;
  const Matrix& raw = cache.head.result();
  out.sigma = raw.topRows(1).unaryExpr([](T v) { return softplus(v); });
  out.logits = raw.bottomRows(config_.classes);
  out.rgb = cache.color.result();
  return out;
}

template <typename T>
void FieldNetwork<T>::backward(const Cache& cache, const Output& out, const Matrix& d_sigma,
                               const Matrix& d_rgb, const Matrix& d_logits, std::span<T> grad) const {
  if (grad.size() != param_count()) fail(ErrorCode::kContract, "gradient buffer size mismatch");
  const std::size_t nt = trunk_.param_count();
  const std::size_t nh = head_.param_count();
  auto g_trunk = grad.subspan(0, nt);
  auto g_head = grad.subspan(nt, nh);
  auto g_color = grad.subspan(nt + nh);

  Matrix d_color_in;
  color_.backward(cache.color, d_rgb, g_color, &d_color_in);

  Matrix d_raw(1 + config_.classes, d_sigma.cols());
  // softplus' expressed through its output.
  d_raw.topRows(1) = d_sigma.array() * (T(1) - (-out.sigma.array()).exp());
  d_raw.bottomRows(config_.classes) = d_logits;
  Matrix d_h;
  head_.backward(cache.head, d_raw, g_head, &d_h);
  d_h += d_color_in.topRows(config_.width);
  trunk_.backward(cache.trunk, d_h, g_trunk, nullptr);
}

template <typename T>
std::size_t FieldNetwork<T>::param_count() const {
  return trunk_.param_count() + head_.param_count() + color_.param_count();
}

template <typename T>
std::vector<std::span<T>> FieldNetwork<T>::param_blocks() {
  return {trunk_.params(), head_.params(), color_.params()};
}

template <typename T>
std::vector<std::span<const T>> FieldNetwork<T>::param_blocks() const {
  return {trunk_.params(), head_.params(), color_.params()};
}

template <typename T>
std::vector<T> FieldNetwork<T>::flat_params() const {
  std::vector<T> out;
  out.reserve(param_count());
  for (auto block : param_blocks()) out.insert(out.end(), block.begin(), block.end());
  return out;
}

template <typename T>
void FieldNetwork<T>::set_flat_params(std::span<const T> values) {
  if (values.size() != param_count()) fail(ErrorCode::kContract, "parameter count mismatch");
  std::size_t off = 0;
  for (auto block : param_blocks()) {
    std::copy(values.begin() + off, values.begin() + off + block.size(), block.begin());
    off += block.size();
  }
}

template <typename T>
void encode_batch(const FieldNetConfig& config, std::span<const Vec3> x, std::span<const Vec3> d,
                  const Conditioner* cond, typename Mlp<T>::Matrix& inputs, typename Mlp<T>::Matrix& dirs) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const auto pe = config.pos_encoding();
  const auto de = config.dir_encoding();
  const int pos_dim = pe.output_dim(3);
  inputs.resize(config.trunk_input_dim(), n);
  dirs.resize(config.dir_input_dim(), n);
  std::vector<float> feat(config.feature_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    T* col = inputs.col(i).data();
    pe.encode<T>(std::span<const double>(x[i].data(), 3), col);
    if (config.feature_dim > 0) {
      cond->feature_into(x[i], feat.data());
      for (int c = 0; c < config.feature_dim; ++c) col[pos_dim + c] = static_cast<T>(feat[c]);
    }
    de.encode<T>(std::span<const double>(d[i].data(), 3), dirs.col(i).data());
  }
}

template class FieldNetwork<float>;
template class FieldNetwork<double>;
template void encode_batch<float>(const FieldNetConfig&, std::span<const Vec3>, std::span<const Vec3>,
                                  const Conditioner*, Eigen::MatrixXf&, Eigen::MatrixXf&);
template void encode_batch<double>(const FieldNetConfig&, std::span<const Vec3>, std::span<const Vec3>,
                                   const Conditioner*, Eigen::MatrixXd&, Eigen::MatrixXd&);

NetworkField::NetworkField(std::shared_ptr<const FieldModel> model, bool use_coarse)
    : model_(std::move(model)), net_(use_coarse ? &model_->coarse : &model_->fine) {}

void NetworkField::evaluate(std::span<const Vec3> x, std::span<const Vec3> d, const Conditioner* cond,
                            SampleBuffer& out) const {
  check_conditioning(cond);
  if (x.size() != d.size()) fail(ErrorCode::kContract, "position/direction batch sizes differ");
  const auto& cfg = model_->config;
  if (cond && cond->feature_dim() != cfg.feature_dim) {
    fail(ErrorCode::kContract, "conditioning feature width does not match the network");
  }
  out.resize(x.size(), cfg.classes);
  constexpr std::size_t kChunk = 4096;
  Eigen::MatrixXf inputs, dirs;
  for (std::size_t begin = 0; begin < x.size(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, x.size() - begin);
    encode_batch<float>(cfg, x.subspan(begin, n), d.subspan(begin, n), cond, inputs, dirs);
    const auto o = net_->forward(inputs, dirs);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = begin + i;
      out.sigma[k] = o.sigma(0, i);
      for (int c = 0; c < 3; ++c) out.rgb[3 * k + c] = o.rgb(c, i);
      float* lg = out.logits_at(k);
      for (int c = 0; c < cfg.classes; ++c) lg[c] = o.logits(c, i);
    }
  }
}

MlpField::MlpField(std::shared_ptr<const FieldModel> model)
    : model_(model), coarse_(model, true), fine_(model, false) {}

namespace {

nlohmann::json layers_json(const FieldNetwork<float>& net) {
  nlohmann::json arr = nlohmann::json::array();
  auto add = [&](const char* name, const Mlp<float>& m) {
    for (const auto& l : m.layers()) {
      arr.push_back({{"block", name}, {"in", l.in}, {"out", l.out}, {"activation", static_cast<int>(l.act)}});
    }
  };
  add("trunk", net.trunk());
  add("head", net.head());
  add("color", net.color());
  return arr;
}

}  // namespace

void save_checkpoint(const std::string& path, const FieldModel& model) {
  nlohmann::json h;
  const auto& c = model.config;
  h["config"] = {{"depth", c.depth},         {"width", c.width},         {"color_width", c.color_width},
                 {"pos_bands", c.pos_bands}, {"dir_bands", c.dir_bands}, {"feature_dim", c.feature_dim},
                 {"classes", c.classes}};
  h["layers"] = layers_json(model.fine);
  nlohmann::json rest = nlohmann::json::array();
  for (double a : model.rest_pose) rest.push_back(rad_to_deg(a));
  h["rest_articulation_deg"] = rest;
  h["encoder"] = {{"kind", model.encoder.kind == EncoderKind::kIdentity ? "identity" : "pyramid"},
                  {"levels", model.encoder.levels}};
  h["bound_radius"] = model.bound_radius;
  h["background"] = {model.background[0], model.background[1], model.background[2]};
  h["param_count"] = model.fine.param_count();
  const std::string header = h.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  const std::uint32_t len = static_cast<std::uint32_t>(header.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(header.data(), len);
  for (const FieldNetwork<float>* net : {&model.coarse, &model.fine}) {
    for (auto block : net->param_blocks()) {
      out.write(reinterpret_cast<const char*>(block.data()), static_cast<std::streamsize>(block.size() * 4));
    }
  }
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

bool is_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, 8);
  return in && std::memcmp(magic, kMagic, 8) == 0;
}

FieldModel load_checkpoint(const std::string& path) {
  using namespace json_util;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorCode::kIo, path + ": bad checkpoint magic");
  std::uint32_t version = 0, len = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&len), 4);
  if (!in || version != kVersion) {
    fail(ErrorCode::kIo, path + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) fail(ErrorCode::kIo, path + ": truncated checkpoint header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::kSchema, path + ": corrupt checkpoint header");
  }
  const std::string where = path + " header";
  const auto& jc = need(h, "config", where);
  FieldModel model;
  model.config.depth = integer(jc, "depth", where);
  model.config.width = integer(jc, "width", where);
  model.config.color_width = integer(jc, "color_width", where);
  model.config.pos_bands = integer(jc, "pos_bands", where);
  model.config.dir_bands = integer(jc, "dir_bands", where);
  model.config.feature_dim = integer(jc, "feature_dim", where);
  model.config.classes = integer(jc, "classes", where);
  for (double deg : numbers(need(h, "rest_articulation_deg", where), 0, where + ": rest_articulation_deg")) {
    model.rest_pose.push_back(deg_to_rad(deg));
  }
  if (h.contains("encoder")) {
    model.encoder.kind = string(h["encoder"], "kind", where) == "identity" ? EncoderKind::kIdentity
                                                                          : EncoderKind::kPyramid;
    model.encoder.levels = integer(h["encoder"], "levels", where);
  }
  model.bound_radius = number_or(h, "bound_radius", 0.0, where);
  if (h.contains("background")) model.background = rgb(h, "background", where);
  model.coarse = FieldNetwork<float>(model.config);
  model.fine = FieldNetwork<float>(model.config);
  if (h.contains("layers") && h["layers"] != layers_json(model.fine)) {
    fail(ErrorCode::kSchema, path + ": layer list does not match the network config");
  }
  for (FieldNetwork<float>* net : {&model.coarse, &model.fine}) {
    for (auto block : net->param_blocks()) {
      in.read(reinterpret_cast<char*>(block.data()), static_cast<std::streamsize>(block.size() * 4));
    }
  }
  if (!in) fail(ErrorCode::kIo, path + ": truncated parameter data");
  return model;
}

}  // namespace clanerf

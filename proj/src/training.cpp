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

#include "clanerf/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clanerf/error.hpp"
#include "clanerf/metrics.hpp"
#include "clanerf/parallel.hpp"
#include "clanerf/renderer.hpp"

namespace clanerf {

double color_loss(std::span<const std::array<double, 3>> coarse, std::span<const std::array<double, 3>> fine,
                  std::span<const std::array<float, 3>> truth, std::vector<std::array<double, 3>>* d_coarse,
                  std::vector<std::array<double, 3>>* d_fine) {
  const std::size_t n = truth.size();
  if (n == 0 || coarse.size() != n || fine.size() != n) fail(ErrorCode::kContract, "color batches differ in size");
  if (d_coarse) d_coarse->assign(n, {0.0, 0.0, 0.0});
  if (d_fine) d_fine->assign(n, {0.0, 0.0, 0.0});
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double ec = coarse[r][c] - truth[r][c];
      const double ef = fine[r][c] - truth[r][c];
      sum += ec * ec + ef * ef;
      if (d_coarse) (*d_coarse)[r][c] = 2.0 * ec / n;
      if (d_fine) (*d_fine)[r][c] = 2.0 * ef / n;
    }
  }
  return sum / n;
}

double cross_entropy(std::span<const double> prob, int label, std::span<double> d_prob) {
  if (label < 0 || static_cast<std::size_t>(label) >= prob.size()) fail(ErrorCode::kContract, "label out of range");
  const double p = prob[label];
  if (!d_prob.empty()) std::fill(d_prob.begin(), d_prob.end(), 0.0);
  if (p >= kProbFloor) {
    if (!d_prob.empty()) d_prob[label] = -1.0 / p;
    return -std::log(p);
  }
  if (!d_prob.empty()) d_prob[label] = -1.0 / kProbFloor;
  return -std::log(kProbFloor) + (kProbFloor - p) / kProbFloor;
}

double seg_loss(std::span<const std::vector<double>> coarse, std::span<const std::vector<double>> fine,
                std::span<const int> labels) {
  const std::size_t n = labels.size();
  if (n == 0 || coarse.size() != n || fine.size() != n) fail(ErrorCode::kContract, "seg batches differ in size");
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) sum += cross_entropy(coarse[r], labels[r]) + cross_entropy(fine[r], labels[r]);
  return sum / n;
}

std::shared_ptr<const Conditioner> make_conditioner(const SceneManifest& manifest,
                                                    const std::vector<std::size_t>& frames,
                                                    const EncoderConfig& encoder) {
  std::vector<SourceView> views;
  for (std::size_t f : frames) {
    Image rgb;
    LabelImage labels;
    load_frame(manifest, f, rgb, labels);
    views.push_back({std::move(rgb), manifest.frames[f].camera});
  }
  return std::make_shared<const Conditioner>(std::move(views), encoder);
}

TrainInstance make_instance(const SceneManifest& manifest, const std::vector<std::size_t>& frames,
                            const EncoderConfig* encoder, const std::vector<std::size_t>& source_frames) {
  std::vector<std::size_t> use = frames;
  if (use.empty()) {
    for (std::size_t i = 0; i < manifest.frames.size(); ++i) use.push_back(i);
  }
  TrainInstance inst;
  inst.background = manifest.background;
  inst.rest = manifest.rest;
  inst.bound_radius = (manifest.t_far - manifest.t_near) / 2.1;
  for (std::size_t f : use) {
    Image rgb;
    LabelImage labels;
    load_frame(manifest, f, rgb, labels);
    const Camera& cam = manifest.frames[f].camera;
    for (int j = 0; j < rgb.height(); ++j) {
      for (int i = 0; i < rgb.width(); ++i) {
        inst.rays.push_back(pixel_center_ray(cam, i, j, manifest.t_near, manifest.t_far));
        inst.rgb.push_back({rgb.at(i, j, 0), rgb.at(i, j, 1), rgb.at(i, j, 2)});
        inst.classes.push_back(label_to_class(labels.at(i, j), manifest.parts));
      }
    }
  }
  if (encoder) {
    inst.cond = make_conditioner(manifest, source_frames.empty() ? std::vector<std::size_t>{0} : source_frames,
                                 *encoder);
  }
  return inst;
}

std::shared_ptr<FieldModel> init_model(const TrainConfig& config, int classes, const ArticulatedPose& rest) {
  auto model = std::make_shared<FieldModel>();
  model->config = config.net;
  model->config.classes = classes;
  model->config.feature_dim = config.conditioned ? config.encoder.feature_dim(3) : 0;
  model->encoder = config.encoder;
  model->rest_pose = rest;
  model->coarse = FieldNetwork<float>(model->config);
  model->fine = FieldNetwork<float>(model->config);
  Rng rc = make_rng(config.seed, 0xc0a25e);
  Rng rf = make_rng(config.seed, 0xf17e);
  model->coarse.initialize(rc);
  model->fine.initialize(rf);
  return model;
}

namespace {

template <typename T>
struct Nets {
  const FieldNetwork<T>* coarse;
  const FieldNetwork<T>* fine;
};

template <typename T>
struct Pass {
  std::vector<std::vector<double>> t;
  typename FieldNetwork<T>::Cache cache;
  typename FieldNetwork<T>::Output out;
  std::vector<std::size_t> offset;
  std::vector<PixelResult> pixels;
  std::vector<std::vector<double>> weights;
};

template <typename T>
struct ChunkResult {
  LossReport loss;
  double fine_sq = 0.0;  // summed squared per-channel color error of the final network
  std::vector<T> grad;
};

// Per-ray view of network outputs as 64-bit arrays.
template <typename T>
struct RayOutputs {
  std::vector<double> sigma, rgb, logits;
  DenseSamples view(int classes) const { return {classes, sigma, rgb, logits}; }
};

template <typename T>
RayOutputs<T> ray_outputs(const typename FieldNetwork<T>::Output& o, std::size_t off, std::size_t k, int classes) {
  RayOutputs<T> r;
  r.sigma.assign(o.sigma.data() + off, o.sigma.data() + off + k);
  r.rgb.assign(o.rgb.data() + 3 * off, o.rgb.data() + 3 * (off + k));
  r.logits.assign(o.logits.data() + classes * off, o.logits.data() + classes * (off + k));
  return r;
}

template <typename T>
void forward_pass(const FieldNetwork<T>& net, const TrainInstance& inst, std::span<const std::size_t> rays,
                  const std::array<float, 3>& background, Pass<T>& pass, bool keep_weights) {
  const auto& cfg = net.config();
  std::vector<Vec3> x, d;
  pass.offset.resize(rays.size());
  for (std::size_t r = 0; r < rays.size(); ++r) {
    pass.offset[r] = x.size();
    const Ray& ray = inst.rays[rays[r]];
    for (double tk : pass.t[r]) {
      x.push_back(ray.at(tk));
      d.push_back(ray.direction);
    }
  }
  typename FieldNetwork<T>::Matrix inputs, dirs;
  encode_batch<T>(cfg, x, d, inst.cond.get(), inputs, dirs);
  pass.out = net.forward(inputs, dirs, pass.cache);
  pass.pixels.resize(rays.size());
  pass.weights.resize(keep_weights ? rays.size() : 0);
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const auto ro = ray_outputs<T>(pass.out, pass.offset[r], pass.t[r].size(), cfg.classes);
    pass.pixels[r] = composite(pass.t[r], inst.rays[rays[r]].t_far, ro.view(cfg.classes), background,
                               keep_weights ? &pass.weights[r] : nullptr);
  }
}

template <typename T>
void backward_pass(const FieldNetwork<T>& net, const TrainInstance& inst, std::span<const std::size_t> rays,
                   const Pass<T>& pass, const std::vector<std::array<double, 3>>& d_color,
                   const std::vector<std::vector<double>>& d_prob, std::span<T> grad) {
  const int C = net.config().classes;
  const Eigen::Index M = pass.out.sigma.cols();
  typename FieldNetwork<T>::Matrix ds(1, M), drgb(3, M), dlog(C, M);
  CompositeGrad cg;
  for (std::size_t r = 0; r < rays.size(); ++r) {
    const std::size_t K = pass.t[r].size();
    const auto ro = ray_outputs<T>(pass.out, pass.offset[r], K, C);
    composite_backward(pass.t[r], inst.rays[rays[r]].t_far, ro.view(C), inst.background, d_color[r], d_prob[r], cg);
    for (std::size_t k = 0; k < K; ++k) {
      const Eigen::Index col = static_cast<Eigen::Index>(pass.offset[r] + k);
      ds(0, col) = static_cast<T>(cg.d_sigma[k]);
      for (int c = 0; c < 3; ++c) drgb(c, col) = static_cast<T>(cg.d_rgb[3 * k + c]);
      for (int c = 0; c < C; ++c) dlog(c, col) = static_cast<T>(cg.d_logits[C * k + c]);
    }
  }
  net.backward(pass.cache, pass.out, ds, drgb, dlog, grad);
}

std::size_t chunk_count(const TrainConfig& cfg) {
  return static_cast<std::size_t>((cfg.batch + cfg.chunk - 1) / cfg.chunk);
}

template <typename T>
void process_chunk(const Nets<T>& nets, const std::vector<TrainInstance>& data, const TrainConfig& cfg,
                   int iteration, std::size_t chunk, bool want_grad, ChunkResult<T>& res) {
  Rng rng = make_rng(cfg.seed, (static_cast<std::uint64_t>(iteration) << 24) | chunk);
  const std::size_t inst_idx = std::min(data.size() - 1, static_cast<std::size_t>(uniform01(rng) * data.size()));
  const TrainInstance& inst = data[inst_idx];
  const std::size_t begin = chunk * cfg.chunk;
  const std::size_t n = std::min<std::size_t>(cfg.chunk, cfg.batch - begin);
  std::vector<std::size_t> rays(n);
  for (auto& r : rays) {
    r = std::min(inst.rays.size() - 1, static_cast<std::size_t>(uniform01(rng) * inst.rays.size()));
  }

  RenderConfig rc;
  rc.k_coarse = cfg.k_coarse;
  rc.jitter = cfg.jitter;
  const bool has_fine = cfg.k_fine > 0;
  const int C = nets.coarse->config().classes;

  Pass<T> coarse, fine;
  coarse.t.resize(n);
  for (std::size_t r = 0; r < n; ++r) coarse.t[r] = sample_stratified(rc, inst.rays[rays[r]], rng);
  forward_pass(*nets.coarse, inst, rays, inst.background, coarse, has_fine);
  if (has_fine) {
    fine.t.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      fine.t[r] = sample_hierarchical(coarse.weights[r], coarse.t[r], inst.rays[rays[r]].t_far, cfg.k_fine,
                                      cfg.jitter, rng);
    }
    forward_pass(*nets.fine, inst, rays, inst.background, fine, false);
  }

  const double inv = 1.0 / cfg.batch;
  const double seg_scale = cfg.detach_seg ? 0.0 : cfg.lambda;
  std::vector<std::array<double, 3>> dc_coarse(n), dc_fine(n);
  std::vector<std::vector<double>> dp_coarse(n, std::vector<double>(C)), dp_fine(n, std::vector<double>(C));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& truth = inst.rgb[rays[r]];
    const int label = inst.classes[rays[r]];
    auto add = [&](const PixelResult& px, std::array<double, 3>& dc, std::vector<double>& dp, double& color,
                   double& seg) {
      for (int c = 0; c < 3; ++c) {
        const double e = px.color[c] - truth[c];
        color += e * e * inv;
        dc[c] = 2.0 * e * inv;
      }
      seg += cross_entropy(px.prob, label, dp) * inv;
      for (double& v : dp) v *= seg_scale * inv;
    };
    add(coarse.pixels[r], dc_coarse[r], dp_coarse[r], res.loss.color_coarse, res.loss.seg_coarse);
    const PixelResult& last = has_fine ? fine.pixels[r] : coarse.pixels[r];
    for (int c = 0; c < 3; ++c) res.fine_sq += std::pow(last.color[c] - truth[c], 2);
    if (has_fine) add(fine.pixels[r], dc_fine[r], dp_fine[r], res.loss.color_fine, res.loss.seg_fine);
  }
  if (!std::isfinite(res.loss.total(cfg.lambda))) {
    fail(ErrorCode::kNumeric, "non-finite loss at iteration " + std::to_string(iteration) + ", batch chunk " +
                                  std::to_string(chunk));
  }
  if (!want_grad) return;
  const std::size_t nc = nets.coarse->param_count();
  res.grad.assign(nc + nets.fine->param_count(), T(0));
  backward_pass(*nets.coarse, inst, rays, coarse, dc_coarse, dp_coarse, std::span<T>(res.grad).subspan(0, nc));
  if (has_fine) backward_pass(*nets.fine, inst, rays, fine, dc_fine, dp_fine, std::span<T>(res.grad).subspan(nc));
}

template <typename T>
LossReport run_batch(const Nets<T>& nets, const std::vector<TrainInstance>& data, const TrainConfig& cfg,
                     int iteration, std::vector<double>* grad, double* fine_sq) {
  const std::size_t chunks = chunk_count(cfg);
  std::vector<ChunkResult<T>> results(chunks);
  parallel_for(chunks, [&](std::size_t c) { process_chunk(nets, data, cfg, iteration, c, grad != nullptr, results[c]); });
  LossReport total;
  double sq = 0.0;
  if (grad) grad->assign(nets.coarse->param_count() + nets.fine->param_count(), 0.0);
  for (const auto& r : results) {
    total.color_coarse += r.loss.color_coarse;
    total.color_fine += r.loss.color_fine;
    total.seg_coarse += r.loss.seg_coarse;
    total.seg_fine += r.loss.seg_fine;
    sq += r.fine_sq;
    if (grad) {
      for (std::size_t i = 0; i < r.grad.size(); ++i) (*grad)[i] += r.grad[i];
    }
  }
  if (fine_sq) *fine_sq = sq;
  return total;
}

void validate(const std::vector<TrainInstance>& data, const TrainConfig& cfg) {
  if (data.empty()) fail(ErrorCode::kInvalidArgument, "training needs at least one instance");
  if (cfg.batch < 1 || cfg.chunk < 1 || cfg.iterations < 0 || cfg.k_coarse < 2 || cfg.k_fine < 0) {
    fail(ErrorCode::kInvalidArgument, "invalid batch, chunk, iteration or sample counts");
  }
  if (!(cfg.lambda >= 0.0) || !(cfg.lr > 0.0) || !(cfg.lr_decay > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "lambda must be nonnegative and the learning rate positive");
  }
  for (const auto& inst : data) {
    if (inst.rays.empty() || inst.rgb.size() != inst.rays.size() || inst.classes.size() != inst.rays.size()) {
      fail(ErrorCode::kInvalidArgument, "training instance has no rays or mismatched targets");
    }
    if (cfg.conditioned && !inst.cond) fail(ErrorCode::kInvalidArgument, "conditioned training needs source views");
    if (cfg.conditioned && inst.cond->feature_dim() != cfg.encoder.feature_dim(3)) {
      fail(ErrorCode::kInvalidArgument, "source-view features do not match the encoder");
    }
  }
}

int class_count(const std::vector<TrainInstance>& data, const TrainConfig& cfg) {
  int classes = cfg.net.classes;
  for (const auto& inst : data) {
    for (int c : inst.classes) classes = std::max(classes, c + 1);
  }
  return classes;
}

}  // namespace

std::vector<double> loss_gradient(const FieldModel& model, const std::vector<TrainInstance>& data,
                                  const TrainConfig& config, int iteration, LossReport* report) {
  validate(data, config);
  const auto c = model.coarse.cast<double>();
  const auto f = model.fine.cast<double>();
  std::vector<double> grad;
  const LossReport r = run_batch(Nets<double>{&c, &f}, data, config, iteration, &grad, nullptr);
  if (report) *report = r;
  return grad;
}

LossReport batch_loss(const FieldModel& model, const std::vector<TrainInstance>& data, const TrainConfig& config,
                      int iteration) {
  validate(data, config);
  const auto c = model.coarse.cast<double>();
  const auto f = model.fine.cast<double>();
  return run_batch(Nets<double>{&c, &f}, data, config, iteration, nullptr, nullptr);
}

TrainResult train(const std::vector<TrainInstance>& data, const TrainConfig& config,
                  const std::function<void(const LogRow&)>& progress) {
  validate(data, config);
  TrainResult result;
  result.model = init_model(config, class_count(data, config), data.front().rest);
  FieldModel& model = *result.model;
  model.background = data.front().background;
  for (const auto& inst : data) model.bound_radius = std::max(model.bound_radius, inst.bound_radius);

  std::vector<float> params = model.coarse.flat_params();
  const std::size_t nc = params.size();
  const auto fine_params = model.fine.flat_params();
  params.insert(params.end(), fine_params.begin(), fine_params.end());
  Adam<float> adam(params.size());

  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path);
    if (!log) fail(ErrorCode::kIo, "cannot write " + config.log_path);
    log << "iter,L_color,L_seg,L_total,psnr_probe\n";
    log.precision(9);
  }

  std::vector<double> grad;
  std::vector<float> gradf;
  for (int it = 0; it < config.iterations; ++it) {
    double fine_sq = 0.0;
    const LossReport loss = run_batch(Nets<float>{&model.coarse, &model.fine}, data, config, it, &grad, &fine_sq);
    gradf.assign(grad.begin(), grad.end());
    const double lr = config.lr * std::pow(config.lr_decay, double(it) / std::max(1, config.iterations));
    adam.step(params, gradf, lr);
    model.coarse.set_flat_params(std::span<const float>(params).subspan(0, nc));
    model.fine.set_flat_params(std::span<const float>(params).subspan(nc));
    result.color_curve.push_back(loss.color());

    const bool last = it + 1 == config.iterations;
    if ((config.log_every > 0 && it % config.log_every == 0) || last) {
      LogRow row{it, loss.color(), loss.seg(), loss.total(config.lambda),
                 psnr_from_mse(fine_sq / (3.0 * config.batch))};
      result.log.push_back(row);
      if (log) log << row.iteration << ',' << row.color << ',' << row.seg << ',' << row.total << ',' << row.psnr_probe
                   << '\n';
      if (progress) progress(row);
    }
    if (!config.checkpoint_path.empty() &&
        ((config.checkpoint_every > 0 && (it + 1) % config.checkpoint_every == 0) || last)) {
      save_checkpoint(config.checkpoint_path, model);
    }
  }
  if (log && !log) fail(ErrorCode::kIo, "failed writing " + config.log_path);
  return result;
}

}  // namespace clanerf

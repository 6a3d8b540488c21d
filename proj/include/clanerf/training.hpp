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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "clanerf/conditioning.hpp"
#include "clanerf/dataset.hpp"
#include "clanerf/mlp_field.hpp"

namespace clanerf {

/// Per-network loss terms for one batch. total() = color() + lambda * seg().
struct LossReport {
  double color_coarse = 0.0;
  double color_fine = 0.0;
  double seg_coarse = 0.0;
  double seg_fine = 0.0;

  double color() const { return color_coarse + color_fine; }
  double seg() const { return seg_coarse + seg_fine; }
  double total(double lambda) const { return color() + lambda * seg(); }
};

/// Sum over the batch of both squared color errors, divided by the batch
/// size. Optional outputs receive dL/dC for each network.
double color_loss(std::span<const std::array<double, 3>> coarse, std::span<const std::array<double, 3>> fine,
                  std::span<const std::array<float, 3>> truth, std::vector<std::array<double, 3>>* d_coarse = nullptr,
                  std::vector<std::array<double, 3>>* d_fine = nullptr);

/// Cross-entropy of one class distribution against a class index. Below
/// kProbFloor the logarithm is continued linearly so the value stays finite.
double cross_entropy(std::span<const double> prob, int label, std::span<double> d_prob = {});
inline constexpr double kProbFloor = 1e-7;

/// Mean over the batch of the coarse plus fine cross-entropies.
double seg_loss(std::span<const std::vector<double>> coarse, std::span<const std::vector<double>> fine,
                std::span<const int> labels);

/// Training rays of one object instance. Classes use internal indices
/// (background = P).
struct TrainInstance {
  std::vector<Ray> rays;
  std::vector<std::array<float, 3>> rgb;
  std::vector<int> classes;
  std::array<float, 3> background{0, 0, 0};
  ArticulatedPose rest;
  double bound_radius = 0.0;
  std::shared_ptr<const Conditioner> cond;  // required when the network is conditioned
};

/// Rays for the given frames of a manifest (all frames when empty). If
/// `encoder` is non-null the listed source frames become conditioning views.
TrainInstance make_instance(const SceneManifest& manifest, const std::vector<std::size_t>& frames,
                            const EncoderConfig* encoder = nullptr,
                            const std::vector<std::size_t>& source_frames = {});

/// Conditioner over the given frames of a manifest.
std::shared_ptr<const Conditioner> make_conditioner(const SceneManifest& manifest,
                                                    const std::vector<std::size_t>& frames,
                                                    const EncoderConfig& encoder);

struct TrainConfig {
  FieldNetConfig net;
  EncoderConfig encoder;
  bool conditioned = false;
  double lambda = 4e-2;
  double lr = 5e-4;
  double lr_decay = 0.1;  // factor reached at the final iteration
  int iterations = 5000;
  int batch = 1024;
  int chunk = 64;  // rays per gradient chunk; chunks are reduced in fixed order
  int k_coarse = 64;
  int k_fine = 64;
  bool jitter = true;
  bool detach_seg = false;  // drop all segmentation gradients
  std::uint64_t seed = 0;
  int log_every = 100;
  std::string log_path;         // CSV: iter,L_color,L_seg,L_total,psnr_probe
  std::string checkpoint_path;  // written every checkpoint_every iterations and at the end
  int checkpoint_every = 0;
};

struct LogRow {
  int iteration = 0;
  double color = 0.0;
  double seg = 0.0;
  double total = 0.0;
  double psnr_probe = 0.0;
};

struct TrainResult {
  std::shared_ptr<FieldModel> model;
  std::vector<LogRow> log;           // every log_every iterations and the last one
  std::vector<double> color_curve;   // L_color at every iteration
};

/// Fits coarse and fine networks with Adam. Throws kNumeric with the
/// iteration and chunk when a loss becomes non-finite.
TrainResult train(const std::vector<TrainInstance>& data, const TrainConfig& config,
                  const std::function<void(const LogRow&)>& progress = {});

/// Network-parameter gradient of the batch loss with no update (coarse then
/// fine, flat layout), for verification.
std::vector<double> loss_gradient(const FieldModel& model, const std::vector<TrainInstance>& data,
                                  const TrainConfig& config, int iteration, LossReport* report = nullptr);

/// Batch loss of the given model for iteration `iteration` of the schedule.
LossReport batch_loss(const FieldModel& model, const std::vector<TrainInstance>& data, const TrainConfig& config,
                      int iteration);

/// Fresh model with initialized networks.
std::shared_ptr<FieldModel> init_model(const TrainConfig& config, int classes, const ArticulatedPose& rest);

}  // namespace clanerf

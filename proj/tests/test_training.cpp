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

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "clanerf/dataset.hpp"
#include "clanerf/error.hpp"
#include "clanerf/procedural.hpp"
#include "clanerf/training.hpp"
#include "support.hpp"

using namespace clanerf;

namespace {

const SceneManifest& tiny_manifest() {
  static const SceneManifest m = [] {
    DatasetConfig cfg;
    cfg.views = 4;
    cfg.resolution = 16;
    cfg.k_coarse = 64;
    cfg.seed = 5;
    return generate_dataset(ProceduralScene::hinge(60.0), cfg, clanerf::testing::scratch_dir("train_data"));
  }();
  return m;
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.net.depth = 2;
  c.net.width = 16;
  c.net.color_width = 8;
  c.net.pos_bands = 4;
  c.net.dir_bands = 2;
  c.iterations = 20;
  c.batch = 48;
  c.chunk = 16;
  c.k_coarse = 8;
  c.k_fine = 8;
  c.lr = 5e-3;
  c.log_every = 5;
  c.seed = 3;
  return c;
}

std::vector<TrainInstance> tiny_data() { return {make_instance(tiny_manifest(), {})}; }

}  // namespace

TEST_CASE("color loss examples and gradient") {
  const std::vector<std::array<double, 3>> exact = {{0.2, 0.4, 0.6}};
  const std::vector<std::array<float, 3>> truth = {{0.2f, 0.4f, 0.6f}};
  const std::vector<std::array<double, 3>> truth_d = {{double(0.2f), double(0.4f), double(0.6f)}};
  CHECK(color_loss(truth_d, truth_d, truth) == 0.0);
  std::vector<std::array<double, 3>> off = truth_d;
  off[0][0] += 0.1;
  CHECK(color_loss(truth_d, off, truth) == doctest::Approx(0.01).epsilon(1e-9));

  Rng rng = make_rng(120, 0);
  std::vector<std::array<double, 3>> c(5), f(5);
  std::vector<std::array<float, 3>> t(5);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 3; ++k) {
      c[i][k] = uniform01(rng);
      f[i][k] = uniform01(rng);
      t[i][k] = static_cast<float>(uniform01(rng));
    }
  std::vector<std::array<double, 3>> dc, df;
  color_loss(c, f, t, &dc, &df);
  const double h = 1e-6;
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 3; ++k) {
      auto fp = f, fm = f;
      fp[i][k] += h;
      fm[i][k] -= h;
      const double fd = (color_loss(c, fp, t) - color_loss(c, fm, t)) / (2 * h);
      CHECK(std::abs(df[i][k] - fd) < 1e-6);
    }
}

TEST_CASE("cross-entropy examples") {
  const std::vector<double> hot = {0.0, 1.0, 0.0};
  CHECK(cross_entropy(hot, 1) == doctest::Approx(0.0).scale(1.0));
  const std::vector<std::vector<double>> uniform(1, std::vector<double>(3, 1.0 / 3.0));
  const std::vector<int> labels = {2};
  CHECK(seg_loss(uniform, uniform, labels) == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-12));
  CHECK(std::isfinite(cross_entropy(hot, 0)));
  CHECK(cross_entropy(hot, 0) > -std::log(kProbFloor));
  std::vector<double> d(3);
  const std::vector<double> p = {0.2, 0.5, 0.3};
  cross_entropy(p, 2, d);
  CHECK(d[2] == doctest::Approx(-1.0 / 0.3));
  CHECK(d[0] == 0.0);
}

TEST_CASE("cross-entropy falls as the true-class logit rises") {
  double prev = std::numeric_limits<double>::infinity();
  for (double z = -3.0; z <= 3.0; z += 0.5) {
    const double e0 = std::exp(0.4), e1 = std::exp(z), e2 = std::exp(-0.2);
    const double s = e0 + e1 + e2;
    const std::vector<double> p = {e0 / s, e1 / s, e2 / s};
    const double l = cross_entropy(p, 1);
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("instances carry one ray per pixel") {
  const SceneManifest& m = tiny_manifest();
  const TrainInstance inst = make_instance(m, {0, 2});
  CHECK(inst.rays.size() == 2u * 16u * 16u);
  CHECK(inst.rgb.size() == inst.rays.size());
  for (int c : inst.classes) CHECK((c >= 0 && c <= 2));
  CHECK(inst.bound_radius > 0.0);
  CHECK_THROWS_AS(make_instance(m, {99}), Error);
}

TEST_CASE("network gradients match finite differences") {
  const std::vector<TrainInstance> data = tiny_data();
  for (int k_fine : {0, 8}) {
    TrainConfig cfg = tiny_config();
    cfg.k_fine = k_fine;
    cfg.lambda = 0.5;
    const auto model = init_model(cfg, 3, data.front().rest);
    const std::vector<double> grad = loss_gradient(*model, data, cfg, 0);
    const std::size_t nc = model->coarse.param_count();
    REQUIRE(grad.size() == nc + model->fine.param_count());
    // Coarse parameters when only the coarse network renders, fine ones otherwise.
    const std::size_t base = k_fine == 0 ? 0 : nc;
    const std::size_t span = k_fine == 0 ? nc : model->fine.param_count();
    Rng rng = make_rng(121, k_fine);
    for (int probe = 0; probe < 5; ++probe) {
      const std::size_t idx = base + static_cast<std::size_t>(uniform01(rng) * span);
      auto loss_at = [&](double delta, double& applied) {
        FieldModel m = *model;
        FieldNetwork<float>& net = idx < nc ? m.coarse : m.fine;
        std::vector<float> p = net.flat_params();
        const std::size_t local = idx < nc ? idx : idx - nc;
        const float before = p[local];
        p[local] = static_cast<float>(before + delta);
        applied = double(p[local]) - double(before);
        net.set_flat_params(p);
        return batch_loss(m, data, cfg, 0).total(cfg.lambda);
      };
      double up_h = 0.0, down_h = 0.0;
      const double up = loss_at(1e-5, up_h);
      const double down = loss_at(-1e-5, down_h);
      const double fd = (up - down) / (up_h - down_h);
      CAPTURE(idx);
      CAPTURE(fd);
      CAPTURE(grad[idx]);
      CHECK(std::abs(grad[idx] - fd) <= 1e-3 * std::max({std::abs(fd), std::abs(grad[idx]), 1e-4}));
    }
  }
}

TEST_CASE("a small step along the negative gradient lowers the color loss") {
  const std::vector<TrainInstance> data = tiny_data();
  TrainConfig cfg = tiny_config();
  cfg.lambda = 0.0;
  const auto model = init_model(cfg, 3, data.front().rest);
  LossReport before;
  const std::vector<double> grad = loss_gradient(*model, data, cfg, 0, &before);
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  norm = std::sqrt(norm);
  REQUIRE(norm > 0.0);
  FieldModel stepped = *model;
  std::vector<float> c = stepped.coarse.flat_params(), f = stepped.fine.flat_params();
  const double eps = 1e-3 / norm;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<float>(c[i] - eps * grad[i]);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = static_cast<float>(f[i] - eps * grad[c.size() + i]);
  stepped.coarse.set_flat_params(c);
  stepped.fine.set_flat_params(f);
  CHECK(batch_loss(stepped, data, cfg, 0).color() < before.color());
}

TEST_CASE("zero lambda and a detached segmentation head give the same color curve") {
  const std::vector<TrainInstance> data = tiny_data();
  TrainConfig a = tiny_config();
  a.lambda = 0.0;
  TrainConfig b = tiny_config();
  b.lambda = 0.3;
  b.detach_seg = true;
  const TrainResult ra = train(data, a);
  const TrainResult rb = train(data, b);
  CHECK(ra.color_curve == rb.color_curve);
  TrainConfig c = tiny_config();
  c.lambda = 0.3;
  CHECK(train(data, c).color_curve != ra.color_curve);
}

TEST_CASE("training is bitwise reproducible across thread counts") {
  const std::vector<TrainInstance> data = tiny_data();
  const TrainConfig cfg = tiny_config();
  const int saved = thread_count();
  set_thread_count(1);
  const TrainResult a = train(data, cfg);
  set_thread_count(3);
  const TrainResult b = train(data, cfg);
  set_thread_count(saved);
  CHECK(a.color_curve == b.color_curve);
  CHECK(a.model->fine.flat_params() == b.model->fine.flat_params());
  TrainConfig other = cfg;
  other.seed = 4;
  CHECK(train(data, other).color_curve != a.color_curve);
}

TEST_CASE("loss log, totals and checkpoints") {
  const std::vector<TrainInstance> data = tiny_data();
  TrainConfig cfg = tiny_config();
  const std::string dir = clanerf::testing::scratch_dir("train_log");
  cfg.log_path = dir + "/log.csv";
  cfg.checkpoint_path = dir + "/model.ckpt";
  cfg.checkpoint_every = 10;
  const TrainResult r = train(data, cfg);
  REQUIRE(r.log.size() == 5u);
  CHECK(r.log.back().iteration == 19);
  CHECK(r.color_curve.size() == 20u);
  for (const LogRow& row : r.log) {
    CHECK(row.total == row.color + cfg.lambda * row.seg);
    CHECK(row.color >= 0.0);
    CHECK(row.seg >= 0.0);
  }
  std::ifstream in(cfg.log_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,L_color,L_seg,L_total,psnr_probe");
  const FieldModel back = load_checkpoint(cfg.checkpoint_path);
  CHECK(back.fine.flat_params() == r.model->fine.flat_params());
  CHECK(back.bound_radius == doctest::Approx(data.front().bound_radius));
}

TEST_CASE("training lowers the loss") {
  const std::vector<TrainInstance> data = tiny_data();
  TrainConfig cfg = tiny_config();
  cfg.iterations = 150;
  const TrainResult r = train(data, cfg);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += r.color_curve[i];
    tail += r.color_curve[r.color_curve.size() - 1 - i];
  }
  CHECK(tail < 0.5 * head);
}

TEST_CASE("non-finite losses abort with the iteration and chunk") {
  std::vector<TrainInstance> data = tiny_data();
  for (auto& c : data.front().rgb) c[0] = std::numeric_limits<float>::quiet_NaN();
  try {
    train(data, tiny_config());
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    const std::string what = e.what();
    CHECK(what.find("iteration 0") != std::string::npos);
    CHECK(what.find("chunk") != std::string::npos);
  }
}

TEST_CASE("invalid training setups are rejected") {
  const std::vector<TrainInstance> data = tiny_data();
  TrainConfig cfg = tiny_config();
  CHECK_THROWS_AS(train({}, cfg), Error);
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(train(data, cfg), Error);
  cfg = tiny_config();
  cfg.conditioned = true;
  CHECK_THROWS_AS(train(data, cfg), Error);
}

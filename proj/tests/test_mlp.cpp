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

#include <filesystem>

#include "clanerf/error.hpp"
#include "clanerf/mlp.hpp"
#include "clanerf/mlp_field.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace clanerf;
using clanerf::testing::check_field_network;
using clanerf::testing::check_mlp;

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  Rng rng = make_rng(7, 0);
  Mlp<double> net({{4, 8, Activation::kRelu}, {8, 3, Activation::kSigmoid}});
  net.initialize(rng);
  const Eigen::MatrixXd x = clanerf::testing::random_matrix(rng, 4, 6);
  Mlp<double>::Cache cache;
  net.forward(x, cache);
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(cache, Eigen::MatrixXd::Zero(3, 6), grad, nullptr);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("linear layer weight gradient is the outer product of upstream and input") {
  Mlp<double> net({{3, 2, Activation::kIdentity}});
  Eigen::MatrixXd x(3, 1);
  x << 1.0, -2.0, 0.5;
  Eigen::MatrixXd g(2, 1);
  g << 0.25, -4.0;
  Mlp<double>::Cache cache;
  net.forward(x, cache);
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(cache, g, grad, nullptr);
  // Column-major W (2 x 3) then b.
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 2; ++r) CHECK(grad[c * 2 + r] == doctest::Approx(g(r, 0) * x(c, 0)));
  CHECK(grad[6] == doctest::Approx(0.25));
  CHECK(grad[7] == doctest::Approx(-4.0));
}

TEST_CASE("backprop matches central differences for every activation mix") {
  const std::vector<std::vector<LayerSpec>> configs = {
      {{5, 4, Activation::kIdentity}},
      {{6, 7, Activation::kRelu}, {7, 5, Activation::kRelu}, {5, 3, Activation::kIdentity}},
      {{4, 6, Activation::kSoftplus}, {6, 2, Activation::kSigmoid}},
      {{3, 5, Activation::kSigmoid}, {5, 5, Activation::kRelu}, {5, 1, Activation::kSoftplus}},
  };
  std::uint64_t seed = 10;
  for (const auto& layers : configs) {
    const auto r = check_mlp(layers, seed++);
    CAPTURE(r.max_rel);
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("field network backprop matches central differences") {
  FieldNetConfig c;
  c.depth = 2;
  c.width = 8;
  c.color_width = 6;
  c.pos_bands = 2;
  c.dir_bands = 1;
  c.classes = 3;
  SUBCASE("unconditioned") {
    const auto r = check_field_network(c, 20);
    CAPTURE(r.max_rel);
    CHECK(r.max_rel < 1e-4);
  }
  SUBCASE("conditioned") {
    c.feature_dim = 9;
    const auto r = check_field_network(c, 21);
    CAPTURE(r.max_rel);
    CHECK(r.max_rel < 1e-4);
  }
}

TEST_CASE("shape mismatches are contract errors") {
  Mlp<double> net({{3, 2, Activation::kRelu}});
  try {
    net.forward(Eigen::MatrixXd::Zero(4, 1));
    FAIL("expected a contract error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kContract);
  }
  CHECK_THROWS_AS(Mlp<double>({{3, 2, Activation::kRelu}, {3, 1, Activation::kRelu}}), Error);
  Mlp<double>::Cache cache;
  net.forward(Eigen::MatrixXd::Zero(3, 2), cache);
  std::vector<double> grad(net.param_count());
  CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Zero(2, 3), grad, nullptr), Error);
}

TEST_CASE("field network outputs respect their ranges") {
  FieldNetConfig c;
  c.depth = 2;
  c.width = 16;
  c.color_width = 8;
  FieldNetwork<float> net(c);
  Rng rng = make_rng(30, 0);
  net.initialize(rng);
  auto flat = net.flat_params();
  for (float& p : flat) p *= 20.0f;  // push activations into saturation
  net.set_flat_params(flat);
  const Eigen::MatrixXf in = clanerf::testing::random_matrix(rng, c.trunk_input_dim(), 64).cast<float>() * 10.0f;
  const Eigen::MatrixXf dirs = clanerf::testing::random_matrix(rng, c.dir_input_dim(), 64).cast<float>();
  const auto out = net.forward(in, dirs);
  CHECK(out.sigma.minCoeff() >= 0.0f);
  CHECK(out.rgb.minCoeff() >= 0.0f);
  CHECK(out.rgb.maxCoeff() <= 1.0f);
  CHECK(out.logits.allFinite());
}

TEST_CASE("adam moves parameters against the gradient") {
  Adam<double> opt(2);
  std::vector<double> p{1.0, -1.0};
  const std::vector<double> g{0.5, -0.5};
  opt.step(p, g, 0.1);
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(-0.9));
  CHECK(opt.steps() == 1);
}

TEST_CASE("checkpoints round-trip bitwise") {
  FieldModel m;
  m.config.depth = 2;
  m.config.width = 8;
  m.config.color_width = 4;
  m.config.feature_dim = 3;
  m.encoder.kind = EncoderKind::kIdentity;
  m.rest_pose = {deg_to_rad(30.0)};
  m.bound_radius = 0.7;
  m.background = {1.0f, 1.0f, 1.0f};
  m.coarse = FieldNetwork<float>(m.config);
  m.fine = FieldNetwork<float>(m.config);
  Rng rng = make_rng(40, 0);
  m.coarse.initialize(rng);
  m.fine.initialize(rng);
  const std::string path = clanerf::testing::scratch_dir("ckpt") + "/m.ckpt";
  save_checkpoint(path, m);
  CHECK(is_checkpoint_file(path));
  const FieldModel back = load_checkpoint(path);
  CHECK(back.coarse.flat_params() == m.coarse.flat_params());
  CHECK(back.fine.flat_params() == m.fine.flat_params());
  CHECK(back.config.feature_dim == 3);
  CHECK(back.encoder.kind == EncoderKind::kIdentity);
  CHECK(back.rest_pose[0] == doctest::Approx(m.rest_pose[0]).epsilon(1e-12));
  CHECK(back.bound_radius == 0.7);
  CHECK(back.background[0] == 1.0f);

  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
  try {
    load_checkpoint(path);
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("network field evaluation is deterministic") {
  auto m = std::make_shared<FieldModel>();
  m->config.depth = 2;
  m->config.width = 16;
  m->config.color_width = 8;
  m->coarse = FieldNetwork<float>(m->config);
  m->fine = FieldNetwork<float>(m->config);
  Rng rng = make_rng(41, 0);
  m->coarse.initialize(rng);
  m->fine.initialize(rng);
  MlpField f(m);
  const Vec3 x(0.1, 0.2, 0.3), d = Vec3(1, 1, 0).normalized();
  const RadianceSample a = eval_field(f, x, d);
  const RadianceSample b = eval_field(f, x, d);
  CHECK(a.sigma == b.sigma);
  CHECK(a.color == b.color);
  CHECK(a.logits == b.logits);
  CHECK_THROWS_AS(eval_field(f, x, Vec3(1, 1, 0)), Error);
}

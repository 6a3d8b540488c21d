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

#include "clanerf/encoding.hpp"
#include "support.hpp"

using namespace clanerf;

TEST_CASE("encoding of zero has zero sines and unit cosines") {
  const PositionalEncoding enc{4, false};
  const std::vector<double> x{0.0, 0.0, 0.0};
  const auto out = enc.encode(x);
  REQUIRE(out.size() == 24u);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == (i % 2 == 0 ? 0.0 : 1.0));
}

TEST_CASE("encoding dimension") {
  CHECK(PositionalEncoding{10, true}.output_dim(3) == 63);
  CHECK(PositionalEncoding{10, false}.output_dim(3) == 60);
  CHECK(PositionalEncoding{4, true}.output_dim(1) == 9);
}

TEST_CASE("encoding layout is interleaved per component") {
  const PositionalEncoding enc{3, true};
  const std::vector<double> x{0.3, -1.7};
  const auto out = enc.encode(x);
  REQUIRE(out.size() == 14u);
  for (int c = 0; c < 2; ++c) {
    const double* block = out.data() + 7 * c;
    CHECK(block[0] == x[c]);
    for (int l = 0; l < 3; ++l) {
      const double w = std::ldexp(kPi, l);
      CHECK(block[1 + 2 * l] == doctest::Approx(std::sin(w * x[c])).epsilon(1e-14));
      CHECK(block[2 + 2 * l] == doctest::Approx(std::cos(w * x[c])).epsilon(1e-14));
    }
  }
}

TEST_CASE("every band is periodic with period 2") {
  const PositionalEncoding enc{6, false};
  Rng rng = make_rng(5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> x{clanerf::testing::uniform(rng, -3, 3)};
    const std::vector<double> y{x[0] + 2.0};
    const auto a = enc.encode(x);
    const auto b = enc.encode(y);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
  }
}

TEST_CASE("float and double encodings agree") {
  const PositionalEncoding enc{5, true};
  const std::vector<double> x{0.25, 0.5, -0.75};
  std::vector<float> f(enc.output_dim(3));
  std::vector<double> d(enc.output_dim(3));
  enc.encode(std::span<const double>(x), f.data());
  enc.encode(std::span<const double>(x), d.data());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == static_cast<float>(d[i]));
}

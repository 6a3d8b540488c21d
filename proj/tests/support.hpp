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

#include <cstdlib>
#include <functional>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"

#include "clanerf/error.hpp"
#include "clanerf/geometry.hpp"
#include "clanerf/parallel.hpp"

namespace clanerf::testing {

/// Fresh scratch directory under CLANERF_TEST_TMP (or the system temp dir).
inline std::string scratch_dir(const std::string& name) {
  const char* root = std::getenv("CLANERF_TEST_TMP");
  std::filesystem::path dir = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "clanerf";
  dir /= name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline Vec3 random_vec(Rng& rng, double scale = 1.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

inline Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline RigidTransform random_rigid(Rng& rng) {
  return rotation_about_axis(random_unit(rng), random_vec(rng), uniform(rng, -kPi, kPi))
      .compose(RigidTransform(Mat3::Identity(), random_vec(rng, 2.0)));
}

/// Runs fn and returns the code of the clanerf::Error it throws.
inline ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode{};
}

}  // namespace clanerf::testing

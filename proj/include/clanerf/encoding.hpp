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

#include <span>
#include <vector>

namespace clanerf {

/// Sinusoidal encoding with octave frequencies 2^l * pi, l = 0..L-1.
/// Per input component the output block is
///   [x?, sin(pi x), cos(pi x), sin(2 pi x), cos(2 pi x), ...].
struct PositionalEncoding {
  int num_bands = 8;
  bool include_input = true;

  int output_dim(int input_dim) const { return input_dim * (2 * num_bands + (include_input ? 1 : 0)); }

  /// Writes output_dim(in.size()) values to out.
  template <typename T>
  void encode(std::span<const double> in, T* out) const;

  std::vector<double> encode(std::span<const double> in) const;
};

}  // namespace clanerf

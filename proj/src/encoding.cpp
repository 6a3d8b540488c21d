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

#include "clanerf/encoding.hpp"

#include <cmath>

#include "clanerf/geometry.hpp"

namespace clanerf {

template <typename T>
void PositionalEncoding::encode(std::span<const double> in, T* out) const {
  for (double v : in) {
    if (include_input) *out++ = static_cast<T>(v);
    double freq = kPi;
    for (int l = 0; l < num_bands; ++l) {
      const double arg = freq * v;
      *out++ = static_cast<T>(std::sin(arg));
      *out++ = static_cast<T>(std::cos(arg));
      freq *= 2.0;
    }
  }
}

template void PositionalEncoding::encode<float>(std::span<const double>, float*) const;
template void PositionalEncoding::encode<double>(std::span<const double>, double*) const;

std::vector<double> PositionalEncoding::encode(std::span<const double> in) const {
  std::vector<double> out(output_dim(static_cast<int>(in.size())));
  encode<double>(in, out.data());
  return out;
}

}  // namespace clanerf

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

#include "clanerf/field.hpp"

#include <cmath>

#include "clanerf/error.hpp"

namespace clanerf {

void RadianceField::check_conditioning(const Conditioner* cond) const {
  if (conditioning_dim() > 0 && cond == nullptr) {
    fail(ErrorCode::kContract, "conditioned field evaluated without conditioning views");
  }
  if (conditioning_dim() == 0 && cond != nullptr) {
    fail(ErrorCode::kContract, "unconditioned field was given conditioning views");
  }
}

RadianceSample eval_field(const RadianceField& field, const Vec3& x, const Vec3& d,
                          const Conditioner* cond) {
  if (std::abs(d.norm() - 1.0) > 1e-6) fail(ErrorCode::kContract, "view direction must be unit-norm");
  SampleBuffer buf;
  field.evaluate(std::span<const Vec3>(&x, 1), std::span<const Vec3>(&d, 1), cond, buf);
  RadianceSample s;
  s.sigma = buf.sigma[0];
  s.color = {buf.rgb[0], buf.rgb[1], buf.rgb[2]};
  s.logits.assign(buf.logits.begin(), buf.logits.end());
  return s;
}

}  // namespace clanerf

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

#include "clanerf/error.hpp"

namespace clanerf {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDomain: return "Domain";
    case ErrorCode::kContract: return "Contract";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kSchema: return "Schema";
    case ErrorCode::kNoBoundary: return "NoBoundary";
    case ErrorCode::kAmbiguousAxis: return "AmbiguousAxis";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kNumeric: return "Numeric";
  }
  return "Unknown";
}

}  // namespace clanerf

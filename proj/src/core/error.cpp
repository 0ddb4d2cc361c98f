// Copyright 2026 The lorafuse Authors
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

#include "lorafuse/error.hpp"

namespace lorafuse
{

std::string_view to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kOutOfModelRange: return "out-of-model-range";
    case ErrorCode::kDegeneratePose: return "degenerate-pose";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kNearSingularity: return "near-singularity";
    case ErrorCode::kNumericalFailure: return "numerical-failure";
    case ErrorCode::kNotAFrame: return "not-a-frame";
    case ErrorCode::kCorruptFrame: return "corrupt-frame";
    case ErrorCode::kUnsupportedFrame: return "unsupported-frame";
    case ErrorCode::kTruncatedFrame: return "truncated-frame";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

void raise(ErrorCode code, const std::string & what)
{
  throw Error(code, what);
}

}  // namespace lorafuse

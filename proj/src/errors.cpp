// Copyright 2026 The privtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privtrain/errors.hpp"

namespace privtrain {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kInvalidOrder: return "invalid-order";
    case ErrorCode::kUnsupportedOrder: return "unsupported-order";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kLabelOutOfRange: return "label-out-of-range";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kBadVersion: return "bad-version";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kInfeasibleGeometry: return "infeasible-geometry";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNumerical: return "numerical";
  }
  return "unknown";
}

}  // namespace privtrain

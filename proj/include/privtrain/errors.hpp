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

#ifndef PRIVTRAIN_ERRORS_HPP_
#define PRIVTRAIN_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace privtrain {

enum class ErrorCode {
  kInvalidParameter,
  kInvalidOrder,
  kUnsupportedOrder,
  kInvalidInput,
  kDimensionMismatch,
  kLabelOutOfRange,
  kConfig,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kEmptyDataset,
  kInfeasibleGeometry,
  kIo,
  kNumerical,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error; the code is the stable part.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace privtrain

#endif  // PRIVTRAIN_ERRORS_HPP_

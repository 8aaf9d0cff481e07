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

#ifndef PRIVTRAIN_CHECKPOINT_HPP_
#define PRIVTRAIN_CHECKPOINT_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "privtrain/models.hpp"

namespace privtrain {

// Model checkpoint ("PVTM"), all fields little-endian:
//   magic "PVTM" | version u16 | arch u16 | flags u16 (bit 0: feedback present)
//   | input_dim u32 | hidden_dim u32 | classes u32
//   | parameters as f32 in flattening order | [feedback hidden x classes f32]
inline constexpr uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams<double> params;
  std::optional<FeedbackMatrix<double>> feedback;
};

std::string EncodeCheckpoint(const Checkpoint& checkpoint);
Checkpoint DecodeCheckpoint(std::string_view bytes);

void WriteCheckpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint ReadCheckpoint(const std::string& path);

}  // namespace privtrain

#endif  // PRIVTRAIN_CHECKPOINT_HPP_

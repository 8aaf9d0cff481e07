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

#include "privtrain/checkpoint.hpp"

#include "privtrain/binary_io.hpp"

namespace privtrain {
namespace {

constexpr std::string_view kMagic = "PVTM";
constexpr uint16_t kFlagFeedback = 1;

}  // namespace

std::string EncodeCheckpoint(const Checkpoint& checkpoint) {
  const auto& p = checkpoint.params;
  std::string out(kMagic);
  binary::Put<uint16_t>(out, kCheckpointVersion);
  binary::Put<uint16_t>(out, static_cast<uint16_t>(p.arch));
  binary::Put<uint16_t>(out, checkpoint.feedback ? kFlagFeedback : 0);
  binary::Put<uint32_t>(out, static_cast<uint32_t>(p.input_dim()));
  binary::Put<uint32_t>(out, static_cast<uint32_t>(p.hidden_dim()));
  binary::Put<uint32_t>(out, static_cast<uint32_t>(p.num_classes()));
  const Vector<double> flat = p.Flatten();
  for (double v : flat) binary::PutF32(out, static_cast<float>(v));
  if (checkpoint.feedback) {
    const auto& b = checkpoint.feedback->b;
    if (b.rows() != p.hidden_dim() || b.cols() != p.num_classes()) {
      throw Error(ErrorCode::kDimensionMismatch, "feedback matrix shape does not match model");
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) binary::PutF32(out, static_cast<float>(b.data()[i]));
  }
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  binary::Reader in(bytes);
  if (!kMagic.starts_with(bytes.substr(0, kMagic.size()))) {
    throw Error(ErrorCode::kBadMagic, "not a PVTM checkpoint");
  }
  in.Take(kMagic.size());
  const auto version = in.Get<uint16_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto arch_tag = in.Get<uint16_t>();
  if (arch_tag > 1) throw Error(ErrorCode::kInvalidInput, "unknown architecture tag");
  const auto flags = in.Get<uint16_t>();
  const auto input_dim = in.Get<uint32_t>();
  const auto hidden_dim = in.Get<uint32_t>();
  const auto classes = in.Get<uint32_t>();
  const Arch arch = static_cast<Arch>(arch_tag);
  Checkpoint ck;
  ck.params = ModelParams<double>::Zeros(arch, input_dim, hidden_dim, classes);
  Vector<double> flat(ck.params.ParameterCount());
  in.Need(static_cast<size_t>(flat.size()) * 4);
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = in.GetF32();
  ck.params.Unflatten(flat);
  if (flags & kFlagFeedback) {
    if (arch != Arch::kMlp2Layer) {
      throw Error(ErrorCode::kInvalidInput, "feedback matrix present on a linear model");
    }
    FeedbackMatrix<double> fb{RowMatrix<double>(hidden_dim, classes)};
    in.Need(static_cast<size_t>(fb.b.size()) * 4);
    for (Eigen::Index i = 0; i < fb.b.size(); ++i) fb.b.data()[i] = in.GetF32();
    ck.feedback = std::move(fb);
  }
  if (in.remaining() != 0) throw Error(ErrorCode::kInvalidInput, "trailing bytes in checkpoint");
  return ck;
}

void WriteCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  binary::WriteFileAtomic(path, EncodeCheckpoint(checkpoint));
}

Checkpoint ReadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(binary::ReadFile(path));
}

}  // namespace privtrain

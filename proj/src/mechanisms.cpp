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

#include "privtrain/mechanisms.hpp"

namespace privtrain {

std::vector<int64_t> PoissonSample(int64_t n, double q, RngStream& stream) {
  if (n < 0) throw Error(ErrorCode::kInvalidParameter, "dataset size must be >= 0");
  if (!(q >= 0.0 && q <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "sampling rate must lie in [0, 1]");
  }
  std::vector<int64_t> batch;
  if (q == 0.0) return batch;
  batch.reserve(static_cast<size_t>(q * n * 1.2) + 8);
  for (int64_t i = 0; i < n; ++i) {
    // One draw per index regardless of q keeps streams aligned across rates.
    if (stream.Uniform() < q) batch.push_back(i);
  }
  return batch;
}

int NoisyArgmax(const VoteHistogram& hist, double noise_scale, RngStream& stream) {
  if (hist.counts.empty()) throw Error(ErrorCode::kInvalidInput, "empty vote histogram");
  if (!(noise_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "noise scale must be >= 0");
  }
  int best = 0;
  double best_score = 0.0;
  for (size_t c = 0; c < hist.counts.size(); ++c) {
    if (hist.counts[c] < 0) throw Error(ErrorCode::kInvalidInput, "negative vote count");
    double score = static_cast<double>(hist.counts[c]);
    if (noise_scale > 0.0) score += noise_scale * stream.Normal();
    if (c == 0 || score > best_score) {
      best = static_cast<int>(c);
      best_score = score;
    }
  }
  return best;
}

}  // namespace privtrain

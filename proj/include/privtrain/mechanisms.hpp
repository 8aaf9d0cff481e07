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

#ifndef PRIVTRAIN_MECHANISMS_HPP_
#define PRIVTRAIN_MECHANISMS_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "privtrain/errors.hpp"
#include "privtrain/rng.hpp"

namespace privtrain {

struct ClipSpec {
  double threshold = 0.1;
};

// sigma is the noise multiplier: added noise has std sigma * sensitivity.
// sigma == 0 is the noiseless test mode.
struct NoiseSpec {
  double sigma = 1.0;
  uint64_t seed = 0;
};

// L2 sensitivity of a vote histogram: one teacher moving its vote changes two
// counts by one.
inline constexpr double kVoteSensitivity = std::numbers::sqrt2;

struct VoteHistogram {
  std::vector<int64_t> counts;

  int64_t total() const {
    int64_t sum = 0;
    for (int64_t c : counts) sum += c;
    return sum;
  }
};

namespace internal {

inline void CheckFinite(bool finite) {
  if (!finite) throw Error(ErrorCode::kInvalidInput, "vector has NaN or Inf entries");
}

// Norms within a few ulps of C count as inside the ball, which makes
// clipping exactly idempotent after the rescale rounds the norm up.
template <typename Scalar>
bool OutsideBall(Scalar norm, Scalar c) {
  return norm > c * (Scalar(1) + Scalar(8) * std::numeric_limits<Scalar>::epsilon());
}

inline void CheckThreshold(double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::kInvalidParameter, "clip threshold must be > 0");
}

}  // namespace internal

// Scales v by min(1, C / ||v||_2).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> ClipL2(
    const Eigen::MatrixBase<Derived>& v, const ClipSpec& spec) {
  using Scalar = typename Derived::Scalar;
  internal::CheckThreshold(spec.threshold);
  internal::CheckFinite(v.allFinite());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = v.reshaped();
  const Scalar norm = out.norm();
  const Scalar c = static_cast<Scalar>(spec.threshold);
  if (internal::OutsideBall(norm, c)) out *= c / norm;
  return out;
}

// In-place variant; returns the pre-clip norm.
template <typename Derived>
typename Derived::Scalar ClipL2InPlace(Eigen::MatrixBase<Derived>& v, const ClipSpec& spec) {
  using Scalar = typename Derived::Scalar;
  internal::CheckThreshold(spec.threshold);
  internal::CheckFinite(v.allFinite());
  const Scalar norm = v.norm();
  const Scalar c = static_cast<Scalar>(spec.threshold);
  if (internal::OutsideBall(norm, c)) v *= c / norm;
  return norm;
}

// Adds i.i.d. Normal(0, (sigma * sensitivity)^2) to every entry, drawing in
// storage order from `stream`.
template <typename Derived>
void GaussianPerturbInPlace(Eigen::MatrixBase<Derived>& v, const NoiseSpec& spec,
                            double sensitivity, RngStream& stream) {
  using Scalar = typename Derived::Scalar;
  if (!(sensitivity > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "sensitivity must be > 0");
  }
  if (!(spec.sigma >= 0.0)) throw Error(ErrorCode::kInvalidParameter, "sigma must be >= 0");
  if (spec.sigma == 0.0) return;
  const double stddev = spec.sigma * sensitivity;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v.derived().data()[i] += static_cast<Scalar>(stddev * stream.Normal());
  }
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> GaussianPerturb(
    const Eigen::MatrixBase<Derived>& v, const NoiseSpec& spec, double sensitivity,
    RngStream& stream) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out = v.reshaped();
  GaussianPerturbInPlace(out, spec, sensitivity, stream);
  return out;
}

// Each index in [0, n) enters independently with probability q.
std::vector<int64_t> PoissonSample(int64_t n, double q, RngStream& stream);

// argmax_c counts[c] + Normal(0, noise_scale^2); ties go to the lowest index.
int NoisyArgmax(const VoteHistogram& hist, double noise_scale, RngStream& stream);

}  // namespace privtrain

#endif  // PRIVTRAIN_MECHANISMS_HPP_

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

#ifndef PRIVTRAIN_HARMONIC_HPP_
#define PRIVTRAIN_HARMONIC_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "privtrain/errors.hpp"
#include "privtrain/image.hpp"
#include "privtrain/models.hpp"

namespace privtrain {

// Orthonormal separable 2-D DCT-II basis of size k x k. filters[u * k + v]
// has vertical frequency u and horizontal frequency v; filters[0] is the
// constant 1/k.
template <typename Scalar>
struct DctFilterBank {
  int kernel_size = 0;
  std::vector<RowMatrix<Scalar>> filters;

  int size() const { return static_cast<int>(filters.size()); }
};

template <typename Scalar = double>
DctFilterBank<Scalar> BuildDctBank(int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidParameter, "DCT kernel size must be >= 1");
  // 1-D basis: basis(u, x) = c(u) cos(pi (2x + 1) u / 2k).
  RowMatrix<Scalar> basis(k, k);
  for (int u = 0; u < k; ++u) {
    const double c = u == 0 ? std::sqrt(1.0 / k) : std::sqrt(2.0 / k);
    for (int x = 0; x < k; ++x) {
      basis(u, x) = static_cast<Scalar>(c * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * k)));
    }
  }
  DctFilterBank<Scalar> bank;
  bank.kernel_size = k;
  bank.filters.reserve(static_cast<size_t>(k) * k);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      bank.filters.push_back(basis.row(u).transpose() * basis.row(v));
    }
  }
  return bank;
}

struct HarmonicOptions {
  int stages = 2;
  int pool = 2;
  // Refuse to build feature vectors wider than this.
  int64_t max_dim = int64_t{1} << 22;
};

// channels * (k^2)^stages, or -1 on overflow past max_dim.
int64_t HarmonicOutputDim(int channels, int kernel_size, const HarmonicOptions& options);

// One stage: valid correlation of every map with every filter, absolute
// value, then non-overlapping average pooling (ragged edge dropped). Output
// map m * K^2 + f comes from input map m and filter f.
std::vector<RowMatrix<double>> HarmonicStage(const std::vector<RowMatrix<double>>& maps,
                                             const DctFilterBank<double>& bank, int pool);

// Runs `stages` harmonic stages on each channel independently and
// global-average-pools every final map into one feature.
Vector<double> HarmonicExtract(const Image& image, const DctFilterBank<double>& bank,
                               const HarmonicOptions& options = {});

}  // namespace privtrain

#endif  // PRIVTRAIN_HARMONIC_HPP_

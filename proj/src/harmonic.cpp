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

#include "privtrain/harmonic.hpp"

#include <string>

namespace privtrain {

int64_t HarmonicOutputDim(int channels, int kernel_size, const HarmonicOptions& options) {
  int64_t dim = channels;
  const int64_t per_stage = static_cast<int64_t>(kernel_size) * kernel_size;
  for (int s = 0; s < options.stages; ++s) {
    dim *= per_stage;
    if (dim > options.max_dim) return -1;
  }
  return dim;
}

std::vector<RowMatrix<double>> HarmonicStage(const std::vector<RowMatrix<double>>& maps,
                                             const DctFilterBank<double>& bank, int pool) {
  if (pool < 1) throw Error(ErrorCode::kInvalidParameter, "pool window must be >= 1");
  const int k = bank.kernel_size;
  std::vector<RowMatrix<double>> out;
  out.reserve(maps.size() * bank.filters.size());
  for (const RowMatrix<double>& map : maps) {
    if (map.rows() < k || map.cols() < k) {
      throw Error(ErrorCode::kInvalidInput, "input " + std::to_string(map.rows()) + "x" +
                                                std::to_string(map.cols()) +
                                                " smaller than kernel " + std::to_string(k));
    }
    const Eigen::Index rh = map.rows() - k + 1;
    const Eigen::Index rw = map.cols() - k + 1;
    const Eigen::Index ph = rh / pool;
    const Eigen::Index pw = rw / pool;
    if (ph < 1 || pw < 1) {
      throw Error(ErrorCode::kInvalidInput, "response map smaller than pooling window");
    }
    for (const RowMatrix<double>& filter : bank.filters) {
      RowMatrix<double> response(rh, rw);
      for (Eigen::Index y = 0; y < rh; ++y) {
        for (Eigen::Index x = 0; x < rw; ++x) {
          response(y, x) = std::abs(map.block(y, x, k, k).cwiseProduct(filter).sum());
        }
      }
      RowMatrix<double> pooled(ph, pw);
      const double inv_area = 1.0 / (static_cast<double>(pool) * pool);
      for (Eigen::Index y = 0; y < ph; ++y) {
        for (Eigen::Index x = 0; x < pw; ++x) {
          pooled(y, x) = response.block(y * pool, x * pool, pool, pool).sum() * inv_area;
        }
      }
      out.push_back(std::move(pooled));
    }
  }
  return out;
}

Vector<double> HarmonicExtract(const Image& image, const DctFilterBank<double>& bank,
                               const HarmonicOptions& options) {
  if (options.stages < 1) throw Error(ErrorCode::kInvalidParameter, "stages must be >= 1");
  if (image.channels < 1) throw Error(ErrorCode::kInvalidInput, "image has no channels");
  if (image.height < bank.kernel_size || image.width < bank.kernel_size) {
    throw Error(ErrorCode::kInvalidInput, "image smaller than kernel");
  }
  const int64_t dim = HarmonicOutputDim(image.channels, bank.kernel_size, options);
  if (dim < 0) {
    throw Error(ErrorCode::kInvalidParameter,
                "feature dimension would exceed cap " + std::to_string(options.max_dim));
  }
  Vector<double> features(dim);
  Eigen::Index at = 0;
  for (int c = 0; c < image.channels; ++c) {
    std::vector<RowMatrix<double>> maps(1, RowMatrix<double>(image.height, image.width));
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) maps[0](y, x) = image.at(y, x, c);
    }
    for (int s = 0; s < options.stages; ++s) maps = HarmonicStage(maps, bank, options.pool);
    for (const auto& map : maps) features(at++) = map.mean();
  }
  return features;
}

}  // namespace privtrain

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

#ifndef PRIVTRAIN_DATASET_HPP_
#define PRIVTRAIN_DATASET_HPP_

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace privtrain {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// N feature vectors of dimension D. classes == 0 marks an unlabeled set
// (public data for PATE, synthetic single-image data); labels are then 0.
struct FeatureDataset {
  FeatureMatrix features;
  std::vector<uint32_t> labels;
  uint32_t classes = 0;
  std::string provenance;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool labeled() const { return classes > 0; }

  // Throws kEmptyDataset, kInvalidInput (non-finite, length mismatch) or
  // kLabelOutOfRange.
  void Validate() const;

  // Equality of the stored content; provenance is not part of the file.
  bool SameContent(const FeatureDataset& other) const;
};

// Feature file ("PVTF"), little-endian:
//   magic "PVTF" | version u16 | flags u16 (bit 0: unlabeled) | N u64 | D u32
//   | classes u32 | N*D f32 row-major | N labels u32
inline constexpr uint16_t kFeatureFileVersion = 1;
inline constexpr uint16_t kFeatureFlagUnlabeled = 1;

std::string EncodeFeatures(const FeatureDataset& dataset);
FeatureDataset DecodeFeatures(std::string_view bytes);

void WriteFeatures(const FeatureDataset& dataset, const std::string& path);
FeatureDataset ReadFeatures(const std::string& path);

// Streams rows to disk for datasets too large to hold in memory. The file
// appears at `path` only after Finish().
class FeatureFileWriter {
 public:
  FeatureFileWriter(const std::string& path, uint64_t rows, uint32_t dim, uint32_t classes);
  ~FeatureFileWriter();
  FeatureFileWriter(const FeatureFileWriter&) = delete;
  FeatureFileWriter& operator=(const FeatureFileWriter&) = delete;

  void AppendRow(std::span<const float> row);
  void Finish(std::span<const uint32_t> labels);

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  uint64_t rows_;
  uint32_t dim_;
  uint32_t classes_;
  uint64_t written_ = 0;
  bool finished_ = false;
};

}  // namespace privtrain

#endif  // PRIVTRAIN_DATASET_HPP_

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

#include "privtrain/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "privtrain/binary_io.hpp"
#include "privtrain/errors.hpp"

namespace privtrain {
namespace {

constexpr std::string_view kMagic = "PVTF";

std::string EncodeHeader(uint64_t rows, uint32_t dim, uint32_t classes) {
  std::string out(kMagic);
  binary::Put<uint16_t>(out, kFeatureFileVersion);
  binary::Put<uint16_t>(out, classes == 0 ? kFeatureFlagUnlabeled : 0);
  binary::Put<uint64_t>(out, rows);
  binary::Put<uint32_t>(out, dim);
  binary::Put<uint32_t>(out, classes);
  return out;
}

}  // namespace

void FeatureDataset::Validate() const {
  if (features.rows() < 1) throw Error(ErrorCode::kEmptyDataset, "dataset has no rows");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
    throw Error(ErrorCode::kInvalidInput, "label count does not match row count");
  }
  if (!features.allFinite()) throw Error(ErrorCode::kInvalidInput, "features contain NaN or Inf");
  if (classes > 0) {
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= classes) {
        throw Error(ErrorCode::kLabelOutOfRange, "label " + std::to_string(labels[i]) + " at row " +
                                                     std::to_string(i) + " >= classes " +
                                                     std::to_string(classes));
      }
    }
  }
}

bool FeatureDataset::SameContent(const FeatureDataset& other) const {
  if (classes != other.classes || labels != other.labels ||
      features.rows() != other.features.rows() || features.cols() != other.features.cols()) {
    return false;
  }
  return std::memcmp(features.data(), other.features.data(), features.size() * sizeof(float)) == 0;
}

std::string EncodeFeatures(const FeatureDataset& dataset) {
  dataset.Validate();
  std::string out = EncodeHeader(static_cast<uint64_t>(dataset.size()),
                                 static_cast<uint32_t>(dataset.dim()), dataset.classes);
  out.reserve(out.size() + dataset.features.size() * 4 + dataset.labels.size() * 4);
  for (Eigen::Index i = 0; i < dataset.features.size(); ++i) {
    binary::PutF32(out, dataset.features.data()[i]);
  }
  for (uint32_t label : dataset.labels) binary::Put<uint32_t>(out, label);
  return out;
}

FeatureDataset DecodeFeatures(std::string_view bytes) {
  binary::Reader in(bytes);
  if (!kMagic.starts_with(bytes.substr(0, kMagic.size()))) {
    throw Error(ErrorCode::kBadMagic, "not a PVTF feature file");
  }
  in.Take(kMagic.size());
  const auto version = in.Get<uint16_t>();
  if (version != kFeatureFileVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported feature file version " + std::to_string(version));
  }
  const auto flags = in.Get<uint16_t>();
  const auto rows = in.Get<uint64_t>();
  const auto dim = in.Get<uint32_t>();
  const auto classes = in.Get<uint32_t>();
  if (rows == 0) throw Error(ErrorCode::kEmptyDataset, "feature file has N = 0");
  if (((flags & kFeatureFlagUnlabeled) != 0) != (classes == 0)) {
    throw Error(ErrorCode::kInvalidInput, "unlabeled flag disagrees with classes field");
  }
  // Guard the size arithmetic before allocating.
  const uint64_t cells = rows * dim;
  if (dim != 0 && cells / dim != rows) throw Error(ErrorCode::kTruncated, "header sizes overflow");
  if (in.remaining() / 4 < cells || (in.remaining() - cells * 4) / 4 < rows) {
    throw Error(ErrorCode::kTruncated, "feature file shorter than its header declares");
  }
  FeatureDataset ds;
  ds.classes = classes;
  ds.features.resize(static_cast<Eigen::Index>(rows), dim);
  const std::string_view payload = in.Take(cells * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(ds.features.data(), payload.data(), payload.size());
  } else {
    binary::Reader cells_in(payload);
    for (uint64_t i = 0; i < cells; ++i) ds.features.data()[i] = cells_in.GetF32();
  }
  ds.labels.resize(rows);
  for (auto& label : ds.labels) label = in.Get<uint32_t>();
  if (in.remaining() != 0) throw Error(ErrorCode::kInvalidInput, "trailing bytes in feature file");
  ds.Validate();
  return ds;
}

void WriteFeatures(const FeatureDataset& dataset, const std::string& path) {
  binary::WriteFileAtomic(path, EncodeFeatures(dataset));
}

FeatureDataset ReadFeatures(const std::string& path) {
  FeatureDataset ds = DecodeFeatures(binary::ReadFile(path));
  ds.provenance = path;
  return ds;
}

FeatureFileWriter::FeatureFileWriter(const std::string& path, uint64_t rows, uint32_t dim,
                                     uint32_t classes)
    : path_(path), tmp_path_(path + ".tmp"), rows_(rows), dim_(dim), classes_(classes) {
  if (rows == 0) throw Error(ErrorCode::kEmptyDataset, "feature file must have N >= 1");
  out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + tmp_path_);
  const std::string header = EncodeHeader(rows, dim, classes);
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
}

FeatureFileWriter::~FeatureFileWriter() {
  if (!finished_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);
  }
}

void FeatureFileWriter::AppendRow(std::span<const float> row) {
  if (row.size() != dim_) throw Error(ErrorCode::kDimensionMismatch, "row has wrong dimension");
  if (written_ == rows_) throw Error(ErrorCode::kInvalidInput, "more rows than declared");
  for (float v : row) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "non-finite feature value");
  }
  std::string buf;
  buf.reserve(row.size() * 4);
  for (float v : row) binary::PutF32(buf, v);
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  ++written_;
}

void FeatureFileWriter::Finish(std::span<const uint32_t> labels) {
  if (written_ != rows_) throw Error(ErrorCode::kInvalidInput, "fewer rows than declared");
  if (labels.size() != rows_) throw Error(ErrorCode::kInvalidInput, "label count mismatch");
  std::string buf;
  for (uint32_t label : labels) {
    if (classes_ > 0 && label >= classes_) {
      throw Error(ErrorCode::kLabelOutOfRange, "label out of declared class range");
    }
    binary::Put<uint32_t>(buf, label);
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out_.close();
  if (!out_) throw Error(ErrorCode::kIo, "write failed for " + tmp_path_);
  std::error_code ec;
  std::filesystem::rename(tmp_path_, path_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp_path_ + ": " + ec.message());
  finished_ = true;
}

}  // namespace privtrain

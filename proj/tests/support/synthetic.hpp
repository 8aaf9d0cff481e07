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

#ifndef PRIVTRAIN_TESTS_SUPPORT_SYNTHETIC_HPP_
#define PRIVTRAIN_TESTS_SUPPORT_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "privtrain/dataset.hpp"
#include "privtrain/image.hpp"

namespace privtrain::testing {

std::string FixturePath(const std::string& name);

// Two Gaussian-ish classes separated by a hyperplane with the given margin.
FeatureDataset MakeSeparable(int64_t n, int d, double margin, uint64_t seed);

// Label = [x0 * x1 > 0]; remaining coordinates are noise. Not linearly
// separable.
FeatureDataset MakeXorLike(int64_t n, int d, uint64_t seed);

// Gaussian blobs, one per class.
FeatureDataset MakeBlobs(int64_t n, int d, int classes, double spread, uint64_t seed);

// Deterministic textured RGB image, values in [0, 1].
Image MakeTexture(int height, int width, uint64_t seed);

struct RdpFixtureRow {
  double q, sigma, alpha, eps;
};
std::vector<RdpFixtureRow> ReadRdpFixture();

}  // namespace privtrain::testing

#endif  // PRIVTRAIN_TESTS_SUPPORT_SYNTHETIC_HPP_

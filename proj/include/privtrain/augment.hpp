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

#ifndef PRIVTRAIN_AUGMENT_HPP_
#define PRIVTRAIN_AUGMENT_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "privtrain/image.hpp"

namespace privtrain {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentSpec {
  int64_t output_count = 50000;
  int output_height = 32;
  int output_width = 32;
  // Fraction of the source area kept by the random crop.
  Range crop_scale{0.08, 1.0};
  double rotation_degrees = 30.0;
  Range contrast{0.6, 1.4};
  double noise_std = 0.02;
  uint64_t seed = 0;

  // Parameter checks only; geometry is checked against a source image by
  // CheckAugmentGeometry.
  void Validate() const;
};

// Throws kInfeasibleGeometry when the smallest crop cannot cover the output.
void CheckAugmentGeometry(const Image& source, const AugmentSpec& spec);

// Output `index` of the synthetic set: random crop, resize, rotation,
// contrast jitter, Gaussian pixel noise, clamp to [0, 1]. Each index draws
// from its own sub-stream, so outputs do not depend on generation order.
Image AugmentOne(const Image& source, const AugmentSpec& spec, int64_t index);

// Calls fn(index, image) for every output index in order.
void ForEachAugmented(const Image& source, const AugmentSpec& spec,
                      const std::function<void(int64_t, const Image&)>& fn);

std::vector<Image> AugmentSingleImage(const Image& source, const AugmentSpec& spec);

}  // namespace privtrain

#endif  // PRIVTRAIN_AUGMENT_HPP_

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

#include "privtrain/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "privtrain/errors.hpp"
#include "privtrain/rng.hpp"

namespace privtrain {
namespace {

struct CropBox {
  int y0, x0, height, width;
};

// Crop dimensions for area fraction `scale` at the output aspect ratio,
// clamped to the source.
std::pair<int, int> CropSize(const Image& source, const AugmentSpec& spec, double scale) {
  const double area = scale * source.height * source.width;
  const double aspect = static_cast<double>(spec.output_width) / spec.output_height;
  const int w = static_cast<int>(std::lround(std::sqrt(area * aspect)));
  const int h = static_cast<int>(std::lround(std::sqrt(area / aspect)));
  return {std::clamp(h, 1, source.height), std::clamp(w, 1, source.width)};
}

// Bilinear sample with edge clamping.
float Sample(const Image& img, double y, double x, int c) {
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  const double top = img.at(y0, x0, c) + (img.at(y0, x1, c) - img.at(y0, x0, c)) * fx;
  const double bottom = img.at(y1, x0, c) + (img.at(y1, x1, c) - img.at(y1, x0, c)) * fx;
  return static_cast<float>(top + (bottom - top) * fy);
}

Image CropResize(const Image& src, const CropBox& box, int out_h, int out_w) {
  Image out(out_h, out_w, src.channels);
  const double sy = static_cast<double>(box.height) / out_h;
  const double sx = static_cast<double>(box.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = std::clamp(box.y0 + (y + 0.5) * sy - 0.5, static_cast<double>(box.y0),
                                    static_cast<double>(box.y0 + box.height - 1));
    for (int x = 0; x < out_w; ++x) {
      const double src_x = std::clamp(box.x0 + (x + 0.5) * sx - 0.5, static_cast<double>(box.x0),
                                      static_cast<double>(box.x0 + box.width - 1));
      for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = Sample(src, src_y, src_x, c);
    }
  }
  return out;
}

Image Rotate(const Image& src, double degrees) {
  Image out(src.height, src.width, src.channels);
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cy = (src.height - 1) / 2.0;
  const double cx = (src.width - 1) / 2.0;
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      // Inverse map the output pixel into the source.
      const double dy = y - cy;
      const double dx = x - cx;
      const double sy = cy + cos_t * dy - sin_t * dx;
      const double sx = cx + sin_t * dy + cos_t * dx;
      for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = Sample(src, sy, sx, c);
    }
  }
  return out;
}

// x * f + mean * (1 - f) per channel; f == 1 leaves pixels bit-identical.
void Contrast(Image& img, double factor) {
  const size_t pixels = static_cast<size_t>(img.height) * img.width;
  for (int c = 0; c < img.channels; ++c) {
    double mean = 0.0;
    for (size_t i = 0; i < pixels; ++i) mean += img.pixels[i * img.channels + c];
    mean /= static_cast<double>(pixels);
    const double offset = mean * (1.0 - factor);
    for (size_t i = 0; i < pixels; ++i) {
      float& v = img.pixels[i * img.channels + c];
      v = static_cast<float>(v * factor + offset);
    }
  }
}

}  // namespace

void AugmentSpec::Validate() const {
  if (output_count < 1) throw Error(ErrorCode::kInvalidParameter, "output_count must be >= 1");
  if (output_height < 1 || output_width < 1) {
    throw Error(ErrorCode::kInvalidParameter, "output size must be positive");
  }
  if (!(crop_scale.lo > 0.0 && crop_scale.lo <= crop_scale.hi && crop_scale.hi <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "crop scale range must satisfy 0 < lo <= hi <= 1");
  }
  if (!(rotation_degrees >= 0.0 && rotation_degrees <= 180.0)) {
    throw Error(ErrorCode::kInvalidParameter, "rotation range must lie in [0, 180] degrees");
  }
  if (!(contrast.lo > 0.0 && contrast.lo <= contrast.hi)) {
    throw Error(ErrorCode::kInvalidParameter, "contrast range must satisfy 0 < lo <= hi");
  }
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::kInvalidParameter, "noise_std must be >= 0");
}

void CheckAugmentGeometry(const Image& source, const AugmentSpec& spec) {
  spec.Validate();
  if (source.channels < 1 || source.height < 1 || source.width < 1) {
    throw Error(ErrorCode::kInvalidInput, "empty source image");
  }
  const auto [h, w] = CropSize(source, spec, spec.crop_scale.lo);
  if (h < spec.output_height || w < spec.output_width) {
    throw Error(ErrorCode::kInfeasibleGeometry,
                "smallest crop " + std::to_string(h) + "x" + std::to_string(w) +
                    " is smaller than output " + std::to_string(spec.output_height) + "x" +
                    std::to_string(spec.output_width));
  }
}

Image AugmentOne(const Image& source, const AugmentSpec& spec, int64_t index) {
  RngStream rng = RngStream(spec.seed).Fork(StreamPurpose::kAugment).Fork(static_cast<uint64_t>(index));
  const double scale = rng.Uniform(spec.crop_scale.lo, spec.crop_scale.hi);
  const auto [h, w] = CropSize(source, spec, scale);
  const CropBox box{static_cast<int>(rng.UniformInt(static_cast<uint64_t>(source.height - h + 1))),
                    static_cast<int>(rng.UniformInt(static_cast<uint64_t>(source.width - w + 1))),
                    h, w};
  Image img = CropResize(source, box, spec.output_height, spec.output_width);
  const double angle = rng.Uniform(-spec.rotation_degrees, spec.rotation_degrees);
  if (angle != 0.0) img = Rotate(img, angle);
  const double factor = rng.Uniform(spec.contrast.lo, spec.contrast.hi);
  if (factor != 1.0) Contrast(img, factor);
  for (float& v : img.pixels) {
    if (spec.noise_std > 0.0) v += static_cast<float>(spec.noise_std * rng.Normal());
    v = std::clamp(v, 0.0f, 1.0f);
  }
  return img;
}

void ForEachAugmented(const Image& source, const AugmentSpec& spec,
                      const std::function<void(int64_t, const Image&)>& fn) {
  CheckAugmentGeometry(source, spec);
  for (int64_t i = 0; i < spec.output_count; ++i) fn(i, AugmentOne(source, spec, i));
}

std::vector<Image> AugmentSingleImage(const Image& source, const AugmentSpec& spec) {
  std::vector<Image> out;
  out.reserve(static_cast<size_t>(spec.output_count));
  ForEachAugmented(source, spec, [&out](int64_t, const Image& img) { out.push_back(img); });
  return out;
}

}  // namespace privtrain

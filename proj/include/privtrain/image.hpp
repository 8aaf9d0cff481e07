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

#ifndef PRIVTRAIN_IMAGE_HPP_
#define PRIVTRAIN_IMAGE_HPP_

#include <string>
#include <vector>

namespace privtrain {

// Float image, channel-last, values nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c), pixels(static_cast<size_t>(h) * w * c, fill) {}

  float& at(int y, int x, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const Image& other) const = default;
};

// PNG (8/16-bit gray, gray+alpha, RGB, RGBA; alpha dropped) and binary
// PGM/PPM (P5/P6). Format is chosen from the file signature.
Image ReadImage(const std::string& path);

// Writes 8-bit PNG, or PGM/PPM when the extension is .pgm/.ppm/.pnm.
void WriteImage(const Image& image, const std::string& path);

}  // namespace privtrain

#endif  // PRIVTRAIN_IMAGE_HPP_

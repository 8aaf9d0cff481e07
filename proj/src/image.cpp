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

#include "privtrain/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <sstream>

#include "privtrain/binary_io.hpp"
#include "privtrain/errors.hpp"

namespace privtrain {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

Image ReadPng(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(ErrorCode::kIo, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "libpng initialization failed");
  }
  Image image;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kInvalidInput, "corrupt PNG " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  const bool sixteen = png_get_bit_depth(png, info) == 16;
  if (sixteen) png_set_swap(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  image = Image(height, width, channels);
  const float scale = sixteen ? 1.0f / 65535.0f : 1.0f / 255.0f;
  for (size_t i = 0; i < image.pixels.size(); ++i) {
    const unsigned v = sixteen ? static_cast<unsigned>(buffer[2 * i] | (buffer[2 * i + 1] << 8))
                               : buffer[i];
    image.pixels[i] = static_cast<float>(v) * scale;
  }
  return image;
}

void WritePng(const Image& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::kInvalidInput, "PNG output needs 1 or 3 channels");
  }
  const std::string tmp = path + ".tmp";
  FilePtr file(std::fopen(tmp.c_str(), "wb"));
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "libpng initialization failed");
  }
  std::vector<unsigned char> buffer(image.pixels.size());
  for (size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<unsigned char>(std::lround(std::clamp(image.pixels[i], 0.0f, 1.0f) * 255.0f));
  }
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = buffer.data() + static_cast<size_t>(y) * image.width * image.channels;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encoding failed for " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  file.reset();
  std::filesystem::rename(tmp, path);
}

// Netpbm header token, skipping whitespace and comments.
std::string NextToken(std::string_view bytes, size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  const size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return std::string(bytes.substr(start, pos - start));
}

Image ReadPnm(const std::string& path, std::string_view bytes) {
  size_t pos = 0;
  const std::string magic = NextToken(bytes, pos);
  const int channels = magic == "P6" ? 3 : 1;
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(NextToken(bytes, pos));
    height = std::stoi(NextToken(bytes, pos));
    maxval = std::stoi(NextToken(bytes, pos));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidInput, "bad netpbm header in " + path);
  }
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw Error(ErrorCode::kInvalidInput, "bad netpbm dimensions in " + path);
  }
  ++pos;  // single whitespace before raster
  const size_t bytes_per = maxval > 255 ? 2 : 1;
  const size_t count = static_cast<size_t>(width) * height * channels;
  if (bytes.size() < pos || bytes.size() - pos < count * bytes_per) {
    throw Error(ErrorCode::kTruncated, "netpbm raster truncated in " + path);
  }
  Image image(height, width, channels);
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (size_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per == 2 ? (raster[2 * i] << 8) | raster[2 * i + 1] : raster[i];
    image.pixels[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

void WritePnm(const Image& image, const std::string& path) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::kInvalidInput, "netpbm output needs 1 or 3 channels");
  }
  std::ostringstream header;
  header << (image.channels == 3 ? "P6" : "P5") << "\n"
         << image.width << " " << image.height << "\n255\n";
  std::string out = header.str();
  for (float v : image.pixels) {
    out.push_back(static_cast<char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  binary::WriteFileAtomic(path, out);
}

}  // namespace

Image ReadImage(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "image file not found: " + path);
  }
  const std::string bytes = binary::ReadFile(path);
  if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0) {
    return ReadPng(path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return ReadPnm(path, bytes);
  }
  throw Error(ErrorCode::kInvalidInput, "unsupported image format: " + path);
}

void WriteImage(const Image& image, const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    WritePnm(image, path);
  } else {
    WritePng(image, path);
  }
}

}  // namespace privtrain

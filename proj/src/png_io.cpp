// Copyright 2026 The avsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avsr/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Writes an 8-bit image with fixed encoder settings so identical pixels give
// identical bytes.
void write_png(const std::string& path, int height, int width, int channels,
               const std::uint8_t* data) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png write failed: " + path);
  }

  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * width * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_png(const std::string& path, int& height, int& width, int& channels,
              std::vector<std::uint8_t>& data) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FileParseError("png decode failed: " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize everything to 8-bit gray or RGB.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  height = static_cast<int>(png_get_image_height(png, info));
  width = static_cast<int>(png_get_image_width(png, info));
  channels = static_cast<int>(png_get_channels(png, info));
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FileParseError("unsupported channel count in " + path);
  }

  data.resize(static_cast<std::size_t>(height) * width * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y)
    rows[y] = data.data() + static_cast<std::size_t>(y) * width * channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void save_mask_png(const Mask& mask, const std::string& path) {
  std::vector<std::uint8_t> gray(mask.bits.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits[i] ? 255 : 0;
  write_png(path, mask.height, mask.width, 1, gray.data());
}

Mask load_mask_png(const std::string& path) {
  int h, w, c;
  std::vector<std::uint8_t> data;
  read_png(path, h, w, c, data);
  Mask mask(h, w);
  if (c == 1) {
    for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] = data[i] >= 128 ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] = data[i * 3] >= 128 ? 1 : 0;
  }
  return mask;
}

void save_image_png(const Image& img, const std::string& path) {
  write_png(path, img.height, img.width, 3, img.rgb.data());
}

Image load_image_png(const std::string& path) {
  int h, w, c;
  std::vector<std::uint8_t> data;
  read_png(path, h, w, c, data);
  Image img(h, w);
  if (c == 3) {
    img.rgb = std::move(data);
  } else {
    for (std::size_t i = 0, n = static_cast<std::size_t>(h) * w; i < n; ++i) {
      img.rgb[i * 3] = img.rgb[i * 3 + 1] = img.rgb[i * 3 + 2] = data[i];
    }
  }
  return img;
}

}  // namespace avsr

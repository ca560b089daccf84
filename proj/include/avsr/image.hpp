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

#ifndef AVSR_IMAGE_HPP
#define AVSR_IMAGE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB frame, row-major, interleaved channels.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;  // height*width*3

  Image() = default;
  Image(int h, int w, Rgb fill = {0, 0, 0}) : height(h), width(w) {
    if (h < 1 || w < 1) throw ContractError("Image dimensions must be >= 1");
    rgb.resize(static_cast<std::size_t>(h) * w * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
      rgb[i] = fill[0];
      rgb[i + 1] = fill[1];
      rgb[i + 2] = fill[2];
    }
  }

  void set(int y, int x, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
  }

  Rgb get(int y, int x) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }

  bool operator==(const Image&) const = default;
};

}  // namespace avsr

#endif  // AVSR_IMAGE_HPP

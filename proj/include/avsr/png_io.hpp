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

#ifndef AVSR_PNG_IO_HPP
#define AVSR_PNG_IO_HPP

#include <string>

#include "avsr/image.hpp"
#include "avsr/mask.hpp"

namespace avsr {

// Masks are 8-bit single-channel PNGs: 0 = background, 255 = foreground.
// Reads binarize at >= 128.
void save_mask_png(const Mask& mask, const std::string& path);
Mask load_mask_png(const std::string& path);

void save_image_png(const Image& img, const std::string& path);
Image load_image_png(const std::string& path);

}  // namespace avsr

#endif  // AVSR_PNG_IO_HPP

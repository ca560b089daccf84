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

#ifndef AVSR_MASK_HPP
#define AVSR_MASK_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

// Binary segmentation mask. Every element is exactly 0 or 1.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // row-major height*width

  Mask() = default;
  Mask(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 1) throw ContractError("Mask dimensions must be >= 1");
    bits.assign(static_cast<std::size_t>(h) * w, 0);
  }

  static Mask zeros(int h, int w) { return Mask(h, w); }

  std::uint8_t& at(int y, int x) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return bits[static_cast<std::size_t>(y) * width + x]; }

  std::size_t pixel_count() const { return bits.size(); }

  long foreground_count() const {
    long n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  bool all_zero() const { return foreground_count() == 0; }

  void validate() const {
    if (height < 1 || width < 1) throw ValidationError("Mask dimensions must be >= 1");
    if (bits.size() != static_cast<std::size_t>(height) * width)
      throw ValidationError("Mask buffer size does not match dimensions");
    for (auto b : bits)
      if (b != 0 && b != 1) throw ValidationError("Mask element outside {0,1}");
  }

  bool operator==(const Mask&) const = default;
};

// Pre-binarization model output; entries in [0, 1].
struct ProbMask {
  int height = 0;
  int width = 0;
  std::vector<double> probs;

  ProbMask() = default;
  ProbMask(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 1) throw ContractError("ProbMask dimensions must be >= 1");
    probs.assign(static_cast<std::size_t>(h) * w, 0.0);
  }

  double& at(int y, int x) { return probs[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return probs[static_cast<std::size_t>(y) * width + x]; }

  void validate() const {
    if (height < 1 || width < 1) throw ValidationError("ProbMask dimensions must be >= 1");
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("ProbMask entry outside [0,1]");
  }
};

}  // namespace avsr

#endif  // AVSR_MASK_HPP

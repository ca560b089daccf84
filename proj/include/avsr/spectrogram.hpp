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

#ifndef AVSR_SPECTROGRAM_HPP
#define AVSR_SPECTROGRAM_HPP

#include <string>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

// time x frequency magnitude matrix standing in for one second of audio.
// All values are finite and >= 0.
struct Spectrogram {
  int frames = 0;  // time bins
  int bins = 0;    // frequency bins
  std::vector<double> values;  // row-major frames*bins

  Spectrogram() = default;
  Spectrogram(int f, int b) : frames(f), bins(b) {
    if (f < 1 || b < 1) throw ContractError("Spectrogram dimensions must be >= 1");
    values.assign(static_cast<std::size_t>(f) * b, 0.0);
  }

  double& at(int t, int b) { return values[static_cast<std::size_t>(t) * bins + b]; }
  double at(int t, int b) const { return values[static_cast<std::size_t>(t) * bins + b]; }

  double max_value() const;
  void validate() const;
};

// On-disk layout: magic "AVSR", then frames and bins as unsigned 32-bit
// little-endian integers, then frames*bins 32-bit little-endian floats,
// row-major. Values are stored at float precision.
void save_spectrogram(const Spectrogram& spec, const std::string& path);
Spectrogram load_spectrogram(const std::string& path);

}  // namespace avsr

#endif  // AVSR_SPECTROGRAM_HPP

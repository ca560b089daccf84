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

#include "avsr/spectrogram.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace avsr {

namespace {

constexpr char kMagic[4] = {'A', 'V', 'S', 'R'};

void put_u32le(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {
      static_cast<unsigned char>(v & 0xff),
      static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff),
      static_cast<unsigned char>((v >> 24) & 0xff),
  };
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

double Spectrogram::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

void Spectrogram::validate() const {
  if (frames < 1 || bins < 1) throw ValidationError("Spectrogram dimensions must be >= 1");
  if (values.size() != static_cast<std::size_t>(frames) * bins)
    throw ValidationError("Spectrogram buffer size does not match dimensions");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("Spectrogram value is not finite");
    if (v < 0.0) throw ValidationError("Spectrogram value is negative");
  }
}

void save_spectrogram(const Spectrogram& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_u32le(os, static_cast<std::uint32_t>(spec.frames));
  put_u32le(os, static_cast<std::uint32_t>(spec.bins));
  for (double v : spec.values) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32le(os, u);
  }
  if (!os) throw IoError("write failed: " + path);
}

Spectrogram load_spectrogram(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw FileParseError("bad spectrogram magic in " + path);
  const std::uint32_t frames = get_u32le(is);
  const std::uint32_t bins = get_u32le(is);
  if (!is || frames == 0 || bins == 0)
    throw FileParseError("bad spectrogram header in " + path);
  Spectrogram spec(static_cast<int>(frames), static_cast<int>(bins));
  for (auto& v : spec.values) {
    const std::uint32_t u = get_u32le(is);
    if (!is) throw FileParseError("truncated spectrogram data in " + path);
    float f;
    std::memcpy(&f, &u, 4);
    v = static_cast<double>(f);
  }
  return spec;
}

}  // namespace avsr

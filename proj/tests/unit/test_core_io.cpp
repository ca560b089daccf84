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

#include <doctest.h>

#include <filesystem>
#include <limits>

#include "avsr/fsutil.hpp"
#include "avsr/png_io.hpp"
#include "avsr/rng.hpp"
#include "avsr/spectrogram.hpp"

using namespace avsr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / "avsr_tests" / name;
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("mask png round-trip preserves bits") {
  const auto dir = temp_dir("mask_png");
  Mask m(9, 13);
  Rng rng(1);
  for (auto& b : m.bits) b = rng.uniform() < 0.4 ? 1 : 0;
  const std::string path = (dir / "m.png").string();
  save_mask_png(m, path);
  const Mask back = load_mask_png(path);
  CHECK(back == m);
}

TEST_CASE("mask png reads binarize at 128") {
  // Build a grayscale image by hand through the image writer.
  const auto dir = temp_dir("mask_thresh");
  Image img(1, 4);
  img.set(0, 0, {0, 0, 0});
  img.set(0, 1, {127, 127, 127});
  img.set(0, 2, {128, 128, 128});
  img.set(0, 3, {255, 255, 255});
  const std::string path = (dir / "gray.png").string();
  save_image_png(img, path);
  const Mask m = load_mask_png(path);
  CHECK(m.at(0, 0) == 0);
  CHECK(m.at(0, 1) == 0);
  CHECK(m.at(0, 2) == 1);
  CHECK(m.at(0, 3) == 1);
}

TEST_CASE("image png round-trip preserves pixels") {
  const auto dir = temp_dir("image_png");
  Image img(5, 7);
  Rng rng(2);
  for (auto& v : img.rgb) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  const std::string path = (dir / "i.png").string();
  save_image_png(img, path);
  CHECK(load_image_png(path) == img);
}

TEST_CASE("png writes are byte-identical for identical pixels") {
  const auto dir = temp_dir("png_det");
  Mask m(16, 16);
  for (int y = 4; y < 12; ++y)
    for (int x = 4; x < 12; ++x) m.at(y, x) = 1;
  save_mask_png(m, (dir / "a.png").string());
  save_mask_png(m, (dir / "b.png").string());
  CHECK(read_file_bytes((dir / "a.png").string()) == read_file_bytes((dir / "b.png").string()));
}

TEST_CASE("spectrogram round-trip is exact at float precision") {
  const auto dir = temp_dir("avsr_bin");
  Spectrogram s(8, 16);
  Rng rng(3);
  for (auto& v : s.values) v = static_cast<double>(static_cast<float>(rng.uniform() * 5.0));
  const std::string path = (dir / "s.avsr").string();
  save_spectrogram(s, path);
  const Spectrogram back = load_spectrogram(path);
  CHECK(back.frames == 8);
  CHECK(back.bins == 16);
  for (std::size_t i = 0; i < s.values.size(); ++i) CHECK(back.values[i] == s.values[i]);
}

TEST_CASE("spectrogram loader rejects bad magic and truncation") {
  const auto dir = temp_dir("avsr_bad");
  const std::string bad_magic = (dir / "bad.avsr").string();
  write_file_bytes(bad_magic, "NOPE\x01\x00\x00\x00\x01\x00\x00\x00");
  CHECK_THROWS_AS(load_spectrogram(bad_magic), FileParseError);

  Spectrogram s(4, 4);
  const std::string good = (dir / "good.avsr").string();
  save_spectrogram(s, good);
  std::string bytes = read_file_bytes(good);
  bytes.resize(bytes.size() - 7);
  const std::string truncated = (dir / "trunc.avsr").string();
  write_file_bytes(truncated, bytes);
  CHECK_THROWS_AS(load_spectrogram(truncated), FileParseError);
}

TEST_CASE("spectrogram validation rejects negatives and non-finite values") {
  Spectrogram s(2, 2);
  s.validate();
  s.at(0, 1) = -0.25;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.at(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("mask validation enforces binary values and positive dims") {
  Mask m(2, 3);
  m.validate();
  m.bits[2] = 2;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  CHECK_THROWS_AS(Mask(0, 4), ContractError);
}

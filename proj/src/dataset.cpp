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

#include "avsr/dataset.hpp"

#include <filesystem>

#include "avsr/png_io.hpp"

namespace avsr {

namespace fs = std::filesystem;

FeatureMap image_to_feature(const Image& img) {
  FeatureMap f;
  f.resize(3, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const Rgb c = img.get(y, x);
      for (int ch = 0; ch < 3; ++ch) f.at(ch, y, x) = c[static_cast<std::size_t>(ch)] / 255.0;
    }
  return f;
}

Dataset::Dataset(const std::string& manifest_path, bool check_files) {
  dir_ = fs::path(manifest_path).parent_path().string();
  records_ = load_manifest(manifest_path, check_files);
  if (records_.empty()) throw ContractError("manifest is empty: " + manifest_path);

  std::map<std::string, std::shared_ptr<const FeatureMap>> frame_cache;
  std::map<std::string, std::shared_ptr<const Spectrogram>> audio_cache;
  std::map<std::string, std::shared_ptr<const Mask>> mask_cache;

  auto frame_of = [&](const std::string& rel) {
    auto it = frame_cache.find(rel);
    if (it == frame_cache.end()) {
      const auto abs = (fs::path(dir_) / rel).string();
      it = frame_cache
               .emplace(rel, std::make_shared<FeatureMap>(image_to_feature(load_image_png(abs))))
               .first;
    }
    return it->second;
  };
  auto audio_of = [&](const std::string& rel) {
    auto it = audio_cache.find(rel);
    if (it == audio_cache.end()) {
      const auto abs = (fs::path(dir_) / rel).string();
      it = audio_cache.emplace(rel, std::make_shared<Spectrogram>(load_spectrogram(abs))).first;
    }
    return it->second;
  };
  auto mask_of = [&](const std::string& rel) {
    auto it = mask_cache.find(rel);
    if (it == mask_cache.end()) {
      const auto abs = (fs::path(dir_) / rel).string();
      it = mask_cache.emplace(rel, std::make_shared<Mask>(load_mask_png(abs))).first;
    }
    return it->second;
  };

  samples_.reserve(records_.size());
  for (const auto& rec : records_) {
    LoadedSample s;
    s.frame = frame_of(rec.frame_path);
    s.audio = audio_of(rec.audio_path);
    s.gt = mask_of(rec.gt_mask_path);
    s.pos_ref = mask_of(rec.pos_mask_path);
    s.kind = rec.condition.kind;
    s.label = rec.condition.kind == ConditionKind::positive ? 1 : 0;
    s.record = &rec;
    samples_.push_back(std::move(s));
  }
}

int Dataset::frame_height() const { return samples_.front().frame->h; }
int Dataset::frame_width() const { return samples_.front().frame->w; }
int Dataset::spec_frames() const { return samples_.front().audio->frames; }
int Dataset::spec_bins() const { return samples_.front().audio->bins; }

}  // namespace avsr

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

#ifndef AVSR_DATASET_HPP
#define AVSR_DATASET_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "avsr/image.hpp"
#include "avsr/manifest.hpp"
#include "avsr/mask.hpp"
#include "avsr/network.hpp"
#include "avsr/spectrogram.hpp"

namespace avsr {

struct LoadedSample {
  std::shared_ptr<const FeatureMap> frame;   // 3 x H x W, values in [0, 1]
  std::shared_ptr<const Spectrogram> audio;
  std::shared_ptr<const Mask> gt;            // training/eval target
  std::shared_ptr<const Mask> pos_ref;       // original sounding-object mask
  std::uint8_t label = 1;                    // 1 for positive pairs
  ConditionKind kind = ConditionKind::positive;
  const SampleRecord* record = nullptr;
};

FeatureMap image_to_feature(const Image& img);

// Loads a manifest and all referenced files into memory. Shared files (the
// empty mask, silence audio) are loaded once.
class Dataset {
 public:
  explicit Dataset(const std::string& manifest_path, bool check_files = false);
  Dataset(const Dataset&) = delete;             // samples point into records_
  Dataset& operator=(const Dataset&) = delete;
  Dataset(Dataset&&) = default;
  Dataset& operator=(Dataset&&) = default;

  std::size_t size() const { return samples_.size(); }
  const LoadedSample& sample(std::size_t i) const { return samples_[i]; }
  const std::vector<SampleRecord>& records() const { return records_; }
  const std::string& manifest_dir() const { return dir_; }

  int frame_height() const;
  int frame_width() const;
  int spec_frames() const;
  int spec_bins() const;

 private:
  std::string dir_;
  std::vector<SampleRecord> records_;
  std::vector<LoadedSample> samples_;
};

}  // namespace avsr

#endif  // AVSR_DATASET_HPP

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

#ifndef AVSR_MANIFEST_HPP
#define AVSR_MANIFEST_HPP

#include <optional>
#include <string>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

enum class ConditionKind { positive, silence, noise, offscreen };

const char* to_string(ConditionKind kind);
ConditionKind condition_kind_from_string(const std::string& s);
bool is_negative(ConditionKind kind);

// The four audio condition kinds; offscreen additionally names the category
// the replacement sound was drawn from.
struct AudioCondition {
  ConditionKind kind = ConditionKind::positive;
  std::optional<std::string> offscreen_source_category;

  void validate() const;
  bool operator==(const AudioCondition&) const = default;
};

// One (frame, audio, mask, condition) evaluation/training unit.
// File paths are relative to the directory containing the manifest.
// pos_mask_path always names the frame's original sounding-object mask; for
// positive records it equals gt_mask_path, for negative records it is the
// reference used by the negative-condition mIoU/F protocol.
struct SampleRecord {
  std::string sample_id;
  std::string clip_id;
  int frame_index = 0;
  std::string subset;  // "s4" | "ms3"
  std::string split;   // "train" | "val" | "test"
  std::string frame_path;
  std::string gt_mask_path;
  std::string pos_mask_path;
  std::string audio_path;
  std::vector<std::string> object_classes;
  std::vector<std::string> sounding_classes;
  AudioCondition condition;

  // Structural invariants only; cross-record and file-content rules live in
  // validate_records().
  void validate() const;
  bool operator==(const SampleRecord&) const = default;
};

// Validates per-record invariants, per-clip sounding-class limits (s4: one,
// ms3: up to three), and, when check_files is set, that every negative
// record's ground-truth mask file is all-zero.
void validate_records(const std::vector<SampleRecord>& records,
                      const std::string& manifest_dir, bool check_files);

// JSON Lines, UTF-8, one record per line. load validates; save is
// byte-stable for identical inputs.
std::vector<SampleRecord> load_manifest(const std::string& path, bool check_files = true);
void save_manifest(const std::vector<SampleRecord>& records, const std::string& path);

}  // namespace avsr

#endif  // AVSR_MANIFEST_HPP

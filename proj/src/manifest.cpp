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

#include "avsr/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "avsr/png_io.hpp"

namespace avsr {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const char* to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::positive: return "positive";
    case ConditionKind::silence: return "silence";
    case ConditionKind::noise: return "noise";
    case ConditionKind::offscreen: return "offscreen";
  }
  return "?";
}

ConditionKind condition_kind_from_string(const std::string& s) {
  if (s == "positive") return ConditionKind::positive;
  if (s == "silence") return ConditionKind::silence;
  if (s == "noise") return ConditionKind::noise;
  if (s == "offscreen") return ConditionKind::offscreen;
  throw ValidationError("unknown condition kind: " + s);
}

bool is_negative(ConditionKind kind) { return kind != ConditionKind::positive; }

void AudioCondition::validate() const {
  const bool has_cat = offscreen_source_category.has_value();
  if (kind == ConditionKind::offscreen && !has_cat)
    throw ValidationError("offscreen condition requires offscreen_source_category");
  if (kind != ConditionKind::offscreen && has_cat)
    throw ValidationError("offscreen_source_category set on non-offscreen condition");
}

void SampleRecord::validate() const {
  if (sample_id.empty()) throw ValidationError("sample_id is empty");
  if (clip_id.empty()) throw ValidationError("clip_id is empty for sample " + sample_id);
  if (frame_index < 0)
    throw ValidationError("negative frame_index for sample " + sample_id);
  if (subset != "s4" && subset != "ms3")
    throw ValidationError("bad subset '" + subset + "' for sample " + sample_id);
  if (split != "train" && split != "val" && split != "test")
    throw ValidationError("bad split '" + split + "' for sample " + sample_id);
  condition.validate();
  for (const auto& c : sounding_classes) {
    if (std::find(object_classes.begin(), object_classes.end(), c) == object_classes.end())
      throw ValidationError("sounding class '" + c + "' not among object classes for sample " +
                            sample_id);
  }
  if (is_negative(condition.kind) && !sounding_classes.empty())
    throw ValidationError("negative-condition sample has sounding classes: " + sample_id);
  if (condition.kind == ConditionKind::positive && sounding_classes.empty())
    throw ValidationError("positive sample has no sounding class: " + sample_id);
}

void validate_records(const std::vector<SampleRecord>& records,
                      const std::string& manifest_dir, bool check_files) {
  for (const auto& rec : records) rec.validate();

  // Per-clip sounding-class limit over the clip's positive records.
  std::map<std::string, std::set<std::string>> clip_sounding;
  std::map<std::string, std::string> clip_subset;
  for (const auto& rec : records) {
    clip_subset[rec.clip_id] = rec.subset;
    for (const auto& c : rec.sounding_classes) clip_sounding[rec.clip_id].insert(c);
  }
  for (const auto& [clip, classes] : clip_sounding) {
    const std::size_t limit = clip_subset[clip] == "s4" ? 1 : 3;
    if (classes.size() > limit)
      throw ValidationError("clip " + clip + " has " + std::to_string(classes.size()) +
                            " sounding classes (limit " + std::to_string(limit) + ")");
  }

  if (!check_files) return;
  std::map<std::string, bool> zero_cache;  // path -> mask is all-zero
  for (const auto& rec : records) {
    if (!is_negative(rec.condition.kind)) continue;
    const std::string path = (fs::path(manifest_dir) / rec.gt_mask_path).string();
    auto it = zero_cache.find(path);
    if (it == zero_cache.end())
      it = zero_cache.emplace(path, load_mask_png(path).all_zero()).first;
    if (!it->second)
      throw ValidationError("negative-condition sample " + rec.sample_id +
                            " references a non-empty ground-truth mask");
  }
}

namespace {

ordered_json record_to_json(const SampleRecord& rec) {
  ordered_json j;
  j["sample_id"] = rec.sample_id;
  j["clip_id"] = rec.clip_id;
  j["frame_index"] = rec.frame_index;
  j["subset"] = rec.subset;
  j["split"] = rec.split;
  j["frame_path"] = rec.frame_path;
  j["gt_mask_path"] = rec.gt_mask_path;
  j["pos_mask_path"] = rec.pos_mask_path;
  j["audio_path"] = rec.audio_path;
  j["object_classes"] = rec.object_classes;
  j["sounding_classes"] = rec.sounding_classes;
  ordered_json cond;
  cond["kind"] = to_string(rec.condition.kind);
  if (rec.condition.offscreen_source_category)
    cond["offscreen_source_category"] = *rec.condition.offscreen_source_category;
  j["condition"] = cond;
  return j;
}

SampleRecord record_from_json(const ordered_json& j) {
  SampleRecord rec;
  rec.sample_id = j.at("sample_id").get<std::string>();
  rec.clip_id = j.at("clip_id").get<std::string>();
  rec.frame_index = j.at("frame_index").get<int>();
  rec.subset = j.at("subset").get<std::string>();
  rec.split = j.at("split").get<std::string>();
  rec.frame_path = j.at("frame_path").get<std::string>();
  rec.gt_mask_path = j.at("gt_mask_path").get<std::string>();
  rec.pos_mask_path = j.at("pos_mask_path").get<std::string>();
  rec.audio_path = j.at("audio_path").get<std::string>();
  rec.object_classes = j.at("object_classes").get<std::vector<std::string>>();
  rec.sounding_classes = j.at("sounding_classes").get<std::vector<std::string>>();
  const auto& cond = j.at("condition");
  rec.condition.kind = condition_kind_from_string(cond.at("kind").get<std::string>());
  if (cond.contains("offscreen_source_category"))
    rec.condition.offscreen_source_category =
        cond.at("offscreen_source_category").get<std::string>();
  return rec;
}

}  // namespace

std::vector<SampleRecord> load_manifest(const std::string& path, bool check_files) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  std::vector<SampleRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
      records.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw FileParseError("manifest parse error at line " + std::to_string(line_no) + " of " +
                           path + ": " + e.what());
    }
  }
  validate_records(records, fs::path(path).parent_path().string(), check_files);
  return records;
}

void save_manifest(const std::vector<SampleRecord>& records, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open manifest for writing: " + path);
  for (const auto& rec : records) {
    os << record_to_json(rec).dump() << '\n';
  }
  if (!os) throw IoError("manifest write failed: " + path);
}

}  // namespace avsr

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

#ifndef AVSR_CORPUS_HPP
#define AVSR_CORPUS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "avsr/manifest.hpp"
#include "avsr/taxonomy.hpp"

namespace avsr {

struct CorpusOptions {
  std::string subset = "s4";
  int clips = -1;  // -1: subset default (480 for s4, 48 for ms3)
  int frames_per_clip = 5;
  int image_size = 64;
  int spec_frames = 8;
  int spec_bins = 16;
  std::uint64_t seed = 0;

  int effective_clips() const { return clips > 0 ? clips : (subset == "s4" ? 480 : 48); }
};

struct SplitCounts {
  int train = 0;
  int val = 0;
  int test = 0;
};

// val = test = ceil(0.15 * total), train = remainder.
SplitCounts split_counts(int total_clips);

struct CorpusSummary {
  std::string subset;
  int clips_total = 0;
  SplitCounts splits;
  int frames_per_clip = 0;
  int scene_classes = 0;
  std::map<std::string, int> sounding_clips_per_category;
};

// Writes frames, per-frame sounding-object masks, positive audio, a
// clips.jsonl manifest per split, taxonomy.json and corpus_meta.json.
// Byte-identical output for identical options.
CorpusSummary generate_corpus(const CorpusOptions& options, const std::string& out_dir);

struct CorpusMeta {
  std::string subset;
  int frames_per_clip = 5;
  int image_size = 64;
  int spec_frames = 8;
  int spec_bins = 16;
  std::uint64_t seed = 0;

  void save_json_file(const std::string& path) const;
  static CorpusMeta load_json_file(const std::string& path);
};

struct BenchOptions {
  double rho = 0.1;
  std::uint64_t seed = 0;
};

struct BenchPaths {
  std::string train_manifest;
  std::string eval_val_manifest;
  std::string eval_test_manifest;
};

// Expands each evaluation clip into the four audio-condition variants and
// mixes a rho-fraction of negative records into the training manifest.
// Negative audio and shared assets are written under out_dir; manifest paths
// are relative to out_dir.
BenchPaths build_benchmark(const std::string& corpus_dir, const BenchOptions& options,
                           const std::string& out_dir);

// Four records per input clip frame: positive, silence, noise, offscreen.
// Output is sorted by (clip_id, frame_index, condition).
std::vector<SampleRecord> build_eval_manifest(const std::vector<SampleRecord>& base_positive,
                                              const CategoryTaxonomy& taxonomy,
                                              std::uint64_t seed, const CorpusMeta& meta,
                                              const std::string& split_dir,
                                              const std::string& out_dir);

// Replaces round(rho * n) records with negative variants, drawn uniformly
// over the three negative types; deterministic for a given seed.
std::vector<SampleRecord> build_train_manifest(const std::vector<SampleRecord>& base_positive,
                                               const CategoryTaxonomy& taxonomy, double rho,
                                               std::uint64_t seed, const CorpusMeta& meta,
                                               const std::string& split_dir,
                                               const std::string& out_dir);

}  // namespace avsr

#endif  // AVSR_CORPUS_HPP

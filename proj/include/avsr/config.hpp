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

#ifndef AVSR_CONFIG_HPP
#define AVSR_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "avsr/errors.hpp"

namespace avsr {

enum class SimilarityHeadKind { cosine, euclidean, concat };

const char* to_string(SimilarityHeadKind kind);
SimilarityHeadKind head_kind_from_string(const std::string& s);

// Run-level knobs. JSON key names match the field names below, with the
// balancing weight serialized as "lambda".
struct RunConfig {
  std::uint64_t seed = 0;
  double negative_ratio = 0.1;   // fraction of negative pairs in training
  double lambda_weight = 1.0;    // similarity-loss balancing weight
  SimilarityHeadKind similarity_head = SimilarityHeadKind::cosine;
  int audio_dim = 32;
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1.5e-3;
  double binarize_threshold = 0.5;
  double f_beta_sq = 0.3;

  void validate() const;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::ordered_json& j);
  static RunConfig from_json_file(const std::string& path);
  void save_json_file(const std::string& path) const;

  // Stable hex digest of the canonical JSON form.
  std::string fingerprint() const;

  bool operator==(const RunConfig&) const = default;
};

}  // namespace avsr

#endif  // AVSR_CONFIG_HPP

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

#include "avsr/config.hpp"

#include <cstdio>
#include <set>

#include "avsr/errors.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/rng.hpp"

namespace avsr {

using ordered_json = nlohmann::ordered_json;

const char* to_string(SimilarityHeadKind kind) {
  switch (kind) {
    case SimilarityHeadKind::cosine: return "cosine";
    case SimilarityHeadKind::euclidean: return "euclidean";
    case SimilarityHeadKind::concat: return "concat";
  }
  return "?";
}

SimilarityHeadKind head_kind_from_string(const std::string& s) {
  if (s == "cosine") return SimilarityHeadKind::cosine;
  if (s == "euclidean") return SimilarityHeadKind::euclidean;
  if (s == "concat") return SimilarityHeadKind::concat;
  throw ValidationError("unknown similarity_head: " + s);
}

void RunConfig::validate() const {
  if (!(negative_ratio >= 0.0 && negative_ratio < 1.0))
    throw ValidationError("negative_ratio must be in [0, 1)");
  if (!(lambda_weight >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (audio_dim < 1) throw ValidationError("audio_dim must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0))
    throw ValidationError("binarize_threshold must be in (0, 1)");
  if (!(f_beta_sq > 0.0)) throw ValidationError("f_beta_sq must be > 0");
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["negative_ratio"] = negative_ratio;
  j["lambda"] = lambda_weight;
  j["similarity_head"] = to_string(similarity_head);
  j["audio_dim"] = audio_dim;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["binarize_threshold"] = binarize_threshold;
  j["f_beta_sq"] = f_beta_sq;
  return j;
}

RunConfig RunConfig::from_json(const ordered_json& j) {
  static const std::set<std::string> known = {
      "seed",       "negative_ratio", "lambda",     "similarity_head", "audio_dim",
      "epochs",     "batch_size",     "learning_rate", "binarize_threshold", "f_beta_sq"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw ValidationError("unknown config key: " + it.key());
  }
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("negative_ratio")) cfg.negative_ratio = j.at("negative_ratio").get<double>();
  if (j.contains("lambda")) cfg.lambda_weight = j.at("lambda").get<double>();
  if (j.contains("similarity_head"))
    cfg.similarity_head = head_kind_from_string(j.at("similarity_head").get<std::string>());
  if (j.contains("audio_dim")) cfg.audio_dim = j.at("audio_dim").get<int>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("binarize_threshold"))
    cfg.binarize_threshold = j.at("binarize_threshold").get<double>();
  if (j.contains("f_beta_sq")) cfg.f_beta_sq = j.at("f_beta_sq").get<double>();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw FileParseError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::save_json_file(const std::string& path) const {
  write_file_bytes(path, to_json().dump(2) + "\n");
}

std::string RunConfig::fingerprint() const {
  const std::uint64_t h = fnv1a64(to_json().dump());
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace avsr

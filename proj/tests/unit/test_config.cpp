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

#include <string>

#include "avsr/config.hpp"

using namespace avsr;

TEST_CASE("defaults are valid and round-trip through json") {
  RunConfig cfg;
  cfg.validate();
  CHECK(cfg.negative_ratio == doctest::Approx(0.1));
  CHECK(cfg.lambda_weight == doctest::Approx(1.0));
  CHECK(cfg.similarity_head == SimilarityHeadKind::cosine);
  const RunConfig back = RunConfig::from_json(cfg.to_json());
  CHECK(back == cfg);
}

TEST_CASE("the balancing weight is serialized under the key lambda") {
  RunConfig cfg;
  cfg.lambda_weight = 0.25;
  const auto j = cfg.to_json();
  CHECK(j.at("lambda").get<double>() == doctest::Approx(0.25));
  CHECK(!j.contains("lambda_weight"));
}

TEST_CASE("unknown keys are rejected by name") {
  nlohmann::ordered_json j;
  j["seed"] = 1;
  j["learning_rte"] = 0.01;
  try {
    RunConfig::from_json(j);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("learning_rte") != std::string::npos);
  }
}

TEST_CASE("out-of-range fields are rejected") {
  RunConfig cfg;
  cfg.negative_ratio = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = RunConfig{};
  cfg.lambda_weight = -0.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = RunConfig{};
  cfg.binarize_threshold = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = RunConfig{};
  cfg.f_beta_sq = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("partial configs take defaults for missing keys") {
  nlohmann::ordered_json j;
  j["seed"] = 3;
  j["epochs"] = 7;
  const RunConfig cfg = RunConfig::from_json(j);
  CHECK(cfg.seed == 3);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.batch_size == 16);
  CHECK(cfg.audio_dim == 32);
}

TEST_CASE("fingerprint is stable and sensitive to field changes") {
  RunConfig a, b;
  CHECK(a.fingerprint() == b.fingerprint());
  b.lambda_weight = 0.5;
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("head names parse and print consistently") {
  for (auto kind : {SimilarityHeadKind::cosine, SimilarityHeadKind::euclidean,
                    SimilarityHeadKind::concat})
    CHECK(head_kind_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(head_kind_from_string("dotproduct"), ValidationError);
}

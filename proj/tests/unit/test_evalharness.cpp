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

#include <cmath>
#include <filesystem>

#include "avsr/corpus.hpp"
#include "avsr/evalharness.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/summation.hpp"

using namespace avsr;
namespace fs = std::filesystem;

namespace {

struct EvalFixture {
  fs::path corpus_dir;
  BenchPaths bench;

  EvalFixture() {
    corpus_dir = fs::temp_directory_path() / "avsr_tests" / "eval_fixture";
    if (!fs::exists(corpus_dir / "corpus_meta.json")) {
      fs::create_directories(corpus_dir);
      CorpusOptions opt;
      opt.subset = "s4";
      opt.clips = 12;
      opt.seed = 1;
      generate_corpus(opt, corpus_dir.string());
    }
    BenchOptions bopt;
    bopt.rho = 0.1;
    bopt.seed = 1;
    bench = build_benchmark(corpus_dir.string(), bopt, (corpus_dir / "bench").string());
  }
};

const EvalFixture& fixture() {
  static EvalFixture f;
  return f;
}

}  // namespace

TEST_CASE("an oracle that reads the ground truth scores perfectly") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_test_manifest);
  const RunConfig cfg;
  const MetricsReport report = evaluate_predictor(
      [](const LoadedSample& s) { return *s.gt; }, ds, cfg, "oracle:gt");
  CHECK(report.g_miou == doctest::Approx(1.0));
  CHECK(report.g_f == doctest::Approx(1.0));
  CHECK(report.g_fpr == doctest::Approx(0.0));
  CHECK(report_globals_consistent(report));
}

TEST_CASE("a visual-prior oracle shows the bias signature") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_test_manifest);
  const RunConfig cfg;
  // Always segments the clip's objects, audio ignored.
  const MetricsReport report = evaluate_predictor(
      [](const LoadedSample& s) { return *s.pos_ref; }, ds, cfg, "oracle:visual");

  const auto& pos = report.condition(ConditionKind::positive);
  for (ConditionKind kind :
       {ConditionKind::silence, ConditionKind::noise, ConditionKind::offscreen}) {
    CHECK(report.condition(kind).miou == doctest::Approx(pos.miou));
    CHECK(report.condition(kind).fscore == doctest::Approx(pos.fscore));
  }

  // Its false-positive rate equals the mean object-area fraction.
  KahanSum area;
  long n_neg = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!is_negative(ds.sample(i).kind)) continue;
    area.add(static_cast<double>(ds.sample(i).pos_ref->foreground_count()) /
             static_cast<double>(ds.sample(i).pos_ref->pixel_count()));
    ++n_neg;
  }
  CHECK(report.g_fpr == doctest::Approx(area.value() / n_neg).epsilon(1e-12));
  CHECK(report.g_fpr > 0.05);  // objects are not tiny, so the bias is visible
}

TEST_CASE("an always-empty predictor earns zero positive scores") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_test_manifest);
  const RunConfig cfg;
  const MetricsReport report = evaluate_predictor(
      [](const LoadedSample& s) { return Mask(s.gt->height, s.gt->width); }, ds, cfg,
      "oracle:empty");
  CHECK(report.condition(ConditionKind::positive).miou == doctest::Approx(0.0));
  CHECK(report.g_miou == doctest::Approx(0.0));
  CHECK(report.g_fpr == doctest::Approx(0.0));
}

TEST_CASE("network evaluation is deterministic and self-consistent") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_test_manifest);
  const RunConfig cfg;
  const Network net(ModelConfig::for_run(cfg, 64, 8, 16), 99);

  const MetricsReport a = evaluate_network(net, ds, cfg, {}, "x");
  const MetricsReport b = evaluate_network(net, ds, cfg, {}, "x");
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(report_globals_consistent(a));

  EvalOptions threaded;
  threaded.num_threads = 4;
  const MetricsReport c = evaluate_network(net, ds, cfg, threaded, "x");
  CHECK(a.to_json().dump() == c.to_json().dump());
}

TEST_CASE("per-clip averaging changes the unit of account, not the protocol") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_test_manifest);
  const RunConfig cfg;
  const Network net(ModelConfig::for_run(cfg, 64, 8, 16), 99);

  EvalOptions per_clip;
  per_clip.per_clip = true;
  const MetricsReport r = evaluate_network(net, ds, cfg, per_clip, "pc");
  // 2 test clips -> n_samples counts clips, not frames
  for (const auto& cm : r.per_condition) CHECK(cm.n_samples == 2);
  CHECK(report_globals_consistent(r));
}

TEST_CASE("checkpoint evaluation round-trips through files byte-identically") {
  const auto& f = fixture();
  const RunConfig cfg;
  const Network net(ModelConfig::for_run(cfg, 64, 8, 16), 5);
  const fs::path dir = fs::temp_directory_path() / "avsr_tests" / "eval_ckpt";
  fs::create_directories(dir);
  const std::string ckpt = (dir / "m.avsc").string();
  save_checkpoint(ckpt, net, cfg, 5, 0, 0.0, nullptr);

  const MetricsReport a = evaluate_checkpoint(ckpt, f.bench.eval_test_manifest);
  const MetricsReport b = evaluate_checkpoint(ckpt, f.bench.eval_test_manifest);
  CHECK(a.to_json().dump() == b.to_json().dump());

  // an override that contradicts the stored architecture is rejected
  RunConfig wrong;
  wrong.audio_dim = 16;
  CHECK_THROWS_AS(evaluate_checkpoint(ckpt, f.bench.eval_test_manifest, &wrong),
                  ContractError);
}

TEST_CASE("similarity histogram covers the whole manifest and starts unseparated") {
  const auto& f = fixture();
  Dataset ds(f.bench.eval_val_manifest);
  const RunConfig cfg;
  const Network net(ModelConfig::for_run(cfg, 64, 8, 16), 31);

  const SimilarityStats stats = similarity_histogram(net, ds);
  CHECK(stats.sigma_scores.size() == ds.size());
  CHECK(stats.labels.size() == ds.size());
  long n_pos = 0, n_neg = 0;
  for (auto l : stats.labels) (l ? n_pos : n_neg) += 1;
  CHECK(n_pos + n_neg == static_cast<long>(ds.size()));
  CHECK(n_pos > 0);
  CHECK(n_neg > 0);
  // untrained: both sides cluster near sigmoid(~0)
  CHECK(std::abs(stats.mean_pos - stats.mean_neg) < 0.1);

  const fs::path dir = fs::temp_directory_path() / "avsr_tests" / "hist";
  fs::create_directories(dir);
  save_similarity_csv(stats, ds, (dir / "hist.csv").string());
  const std::string csv = read_file_bytes((dir / "hist.csv").string());
  CHECK(csv.rfind("sample_id,label,sigma_score\n", 0) == 0);
}

TEST_CASE("unseen-audio evaluation reports one row per held-out class") {
  const auto& f = fixture();
  const RunConfig cfg;
  const Network net(ModelConfig::for_run(cfg, 64, 8, 16), 17);
  const auto rows = unseen_audio_eval(net, f.corpus_dir.string(), cfg);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.n_samples > 0);
    CHECK(r.fpr >= 0.0);
    CHECK(r.fpr <= 1.0);
    CHECK(r.miou >= 0.0);
    CHECK(r.miou <= 1.0);
  }
}

namespace {

RunConfig one_epoch_config() {
  RunConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  return cfg;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("sweeps emit one row per configuration and a CSV table") {
  const auto& f = fixture();
  const RunConfig base = one_epoch_config();
  const fs::path out = fs::temp_directory_path() / "avsr_tests" / "sweeps";

  SUBCASE("ratio sweep") {
    const auto rows = ratio_sweep(f.corpus_dir.string(), base, {0.0, 0.1, 0.2, 0.3},
                                  (out / "ratio").string());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].cfg.negative_ratio == 0.0);
    CHECK(rows[3].cfg.negative_ratio == 0.3);
    const std::string csv = read_file_bytes((out / "ratio" / "ratio_sweep.csv").string());
    CHECK(count_lines(csv) == 5);  // header + 4 rows
    CHECK(csv.rfind("rho,", 0) == 0);
  }
  SUBCASE("guidance ablation has exactly three rows") {
    const auto rows = ablation_guidance(f.corpus_dir.string(), base,
                                        (out / "guidance").string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cfg.negative_ratio == 0.0);
    CHECK(rows[0].cfg.lambda_weight == 0.0);
    CHECK(rows[1].cfg.lambda_weight == 0.0);
    CHECK(rows[1].cfg.negative_ratio == doctest::Approx(base.negative_ratio));
    CHECK(rows[2].cfg.lambda_weight == doctest::Approx(base.lambda_weight));
    CHECK(count_lines(read_file_bytes((out / "guidance" / "guidance_ablation.csv").string())) ==
          4);
  }
  SUBCASE("head sweep covers the three similarity heads") {
    const auto rows =
        head_sweep(f.corpus_dir.string(), base, (out / "heads").string(), 0, true);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "cosine");
    CHECK(rows[1].label == "euclidean");
    CHECK(rows[2].label == "concat");
    for (const auto& r : rows)
      CHECK(r.report.condition(ConditionKind::positive).miou >= 0.0);
  }
  SUBCASE("lambda sweep echoes the weight column") {
    const auto rows = lambda_sweep(f.corpus_dir.string(), base, {0.2, 0.4, 0.6, 0.8, 1.0},
                                   (out / "lambda").string());
    REQUIRE(rows.size() == 5);
    const std::string csv = read_file_bytes((out / "lambda" / "lambda_sweep.csv").string());
    CHECK(csv.rfind("lambda,", 0) == 0);
    CHECK(count_lines(csv) == 6);
  }
}

TEST_CASE("cached training runs are reused for identical configs") {
  const auto& f = fixture();
  const RunConfig cfg = one_epoch_config();
  const fs::path dir = fs::temp_directory_path() / "avsr_tests" / "cache_run";
  const TrainedRun first = train_and_eval(f.corpus_dir.string(), cfg, dir.string());
  CHECK(!first.from_cache);
  const TrainedRun second = train_and_eval(f.corpus_dir.string(), cfg, dir.string());
  CHECK(second.from_cache);
  CHECK(first.test_report.to_json().dump() == second.test_report.to_json().dump());

  // a different config in the same workdir retrains
  RunConfig other = cfg;
  other.lambda_weight = 0.5;
  const TrainedRun third = train_and_eval(f.corpus_dir.string(), other, dir.string());
  CHECK(!third.from_cache);
}

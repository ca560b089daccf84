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
#include <set>

#include "avsr/corpus.hpp"
#include "avsr/evalharness.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/losses.hpp"
#include "avsr/rng.hpp"
#include "avsr/trainer.hpp"

#include "../support/fd_check.hpp"

using namespace avsr;
namespace fs = std::filesystem;

namespace {

// One tiny corpus + benchmark shared by the training tests.
struct TrainFixture {
  fs::path corpus_dir;
  BenchPaths bench;

  TrainFixture() {
    corpus_dir = fs::temp_directory_path() / "avsr_tests" / "train_fixture";
    if (!fs::exists(corpus_dir / "corpus_meta.json")) {
      fs::create_directories(corpus_dir);
      CorpusOptions opt;
      opt.subset = "s4";
      opt.clips = 12;
      opt.seed = 0;
      generate_corpus(opt, corpus_dir.string());
    }
    BenchOptions bopt;
    bopt.rho = 0.25;
    bopt.seed = 0;
    bench = build_benchmark(corpus_dir.string(), bopt, (corpus_dir / "bench").string());
  }
};

const TrainFixture& fixture() {
  static TrainFixture f;
  return f;
}

RunConfig tiny_config(int epochs = 2) {
  RunConfig cfg;
  cfg.seed = 0;
  cfg.negative_ratio = 0.25;
  cfg.epochs = epochs;
  cfg.batch_size = 8;
  return cfg;
}

fs::path run_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / "avsr_tests" / "runs" / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("epoch batching is a seeded permutation in fixed-size chunks") {
  const auto a = sample_epoch_batches(25, 8, 3, 0);
  const auto b = sample_epoch_batches(25, 8, 3, 0);
  REQUIRE(a.size() == 4);
  CHECK(a[0].indices == b[0].indices);
  CHECK(a[3].indices.size() == 1);  // remainder batch

  std::set<std::size_t> seen;
  for (const auto& batch : a) seen.insert(batch.indices.begin(), batch.indices.end());
  CHECK(seen.size() == 25);

  const auto c = sample_epoch_batches(25, 8, 3, 1);
  CHECK(a[0].indices != c[0].indices);  // epochs reshuffle
  CHECK_THROWS_AS(sample_epoch_batches(0, 8, 3, 0), ContractError);
}

TEST_CASE("negative training samples carry all-zero masks and zero labels") {
  const auto& f = fixture();
  Dataset ds(f.bench.train_manifest);
  long neg = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const LoadedSample& s = ds.sample(i);
    if (s.label == 0) {
      ++neg;
      CHECK(is_negative(s.kind));
      CHECK(s.gt->all_zero());
      CHECK(s.pos_ref->foreground_count() > 0);
    } else {
      CHECK(s.kind == ConditionKind::positive);
    }
  }
  // 8 train clips x 5 frames = 40 records; rho 0.25 -> 10 negatives.
  CHECK(ds.size() == 40);
  CHECK(neg == 10);
}

TEST_CASE("total-loss gradients match finite differences on a mixed batch") {
  const auto& f = fixture();
  Dataset ds(f.bench.train_manifest);

  // two positive and two negative samples
  Batch batch;
  std::size_t pos_found = 0, neg_found = 0;
  for (std::size_t i = 0; i < ds.size() && batch.indices.size() < 4; ++i) {
    if (ds.sample(i).label == 1 && pos_found < 2) {
      batch.indices.push_back(i);
      ++pos_found;
    } else if (ds.sample(i).label == 0 && neg_found < 2) {
      batch.indices.push_back(i);
      ++neg_found;
    }
  }
  REQUIRE(batch.indices.size() == 4);

  const ModelConfig mc = ModelConfig::for_run(tiny_config(), 64, 8, 16);
  for (double lambda : {0.0, 0.5, 1.0}) {
    CAPTURE(lambda);
    Network net(mc, 42);
    avsr_tests::perturb_params(net, 420);
    std::vector<double> analytic(net.param_count(), 0.0);
    batch_loss_and_grad(net, ds, batch, lambda, analytic, false, 0, 1);

    std::vector<double> scratch(net.param_count(), 0.0);
    const auto loss_fn = [&]() {
      std::fill(scratch.begin(), scratch.end(), 0.0);
      return batch_loss_and_grad(net, ds, batch, lambda, scratch, false, 0, 1).total;
    };
    const avsr_tests::FdStats stats =
        avsr_tests::fd_check_params(net, analytic, loss_fn, 2, 77);
    INFO(stats.first_failure);
    CHECK(stats.failures == 0);
    CHECK(stats.strict_checked > 0);
  }
}

TEST_CASE("with lambda zero the similarity-loss path contributes exactly nothing") {
  const auto& f = fixture();
  Dataset ds(f.bench.train_manifest);
  Batch batch;
  for (std::size_t i = 0; i < 8; ++i) batch.indices.push_back(i);

  // Score-exclusive parameters (the concat head MLP) get a zero gradient.
  RunConfig concat_cfg = tiny_config();
  concat_cfg.similarity_head = SimilarityHeadKind::concat;
  const ModelConfig mc_concat = ModelConfig::for_run(concat_cfg, 64, 8, 16);
  Network concat_net(mc_concat, 7);
  std::vector<double> grad(concat_net.param_count(), 0.0);
  batch_loss_and_grad(concat_net, ds, batch, 0.0, grad, false, 0, 1);
  for (const char* name : {"simhead.fc1.w", "simhead.fc1.b", "simhead.fc2.w", "simhead.fc2.b",
                           "simhead.fc3.w", "simhead.fc3.b"}) {
    const auto& e = concat_net.params().by_name(name);
    for (std::size_t i = 0; i < e.count; ++i) CHECK(grad[e.offset + i] == 0.0);
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  batch_loss_and_grad(concat_net, ds, batch, 1.0, grad, false, 0, 1);
  double mag = 0.0;
  {
    const auto& e = concat_net.params().by_name("simhead.fc1.w");
    for (std::size_t i = 0; i < e.count; ++i) mag += std::abs(grad[e.offset + i]);
  }
  CHECK(mag > 0.0);

  // For every parameter the gradient is linear in lambda:
  // grad(0.5) = (grad(0) + grad(1)) / 2.
  const ModelConfig mc = ModelConfig::for_run(tiny_config(), 64, 8, 16);
  Network net(mc, 7);
  std::vector<double> g0(net.param_count(), 0.0), g1(net.param_count(), 0.0),
      gh(net.param_count(), 0.0);
  batch_loss_and_grad(net, ds, batch, 0.0, g0, false, 0, 1);
  batch_loss_and_grad(net, ds, batch, 1.0, g1, false, 0, 1);
  batch_loss_and_grad(net, ds, batch, 0.5, gh, false, 0, 1);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < gh.size(); ++i)
    max_dev = std::max(max_dev, std::abs(gh[i] - 0.5 * (g0[i] + g1[i])));
  CHECK(max_dev < 1e-12);
}

TEST_CASE("fixed seeds reproduce the epoch-zero loss bit for bit") {
  const auto& f = fixture();
  const RunConfig cfg = tiny_config(1);
  FitOptions opt;
  opt.num_threads = 2;

  opt.run_dir = run_dir("det_a").string();
  const FitResult a = fit(cfg, f.bench.train_manifest, f.bench.eval_val_manifest, opt);
  opt.run_dir = run_dir("det_b").string();
  const FitResult b = fit(cfg, f.bench.train_manifest, f.bench.eval_val_manifest, opt);
  REQUIRE(!a.log.empty());
  CHECK(a.log[0].loss_total == b.log[0].loss_total);
  CHECK(a.log[0].val_gmiou == b.log[0].val_gmiou);
}

TEST_CASE("thread count does not change training results") {
  const auto& f = fixture();
  const RunConfig cfg = tiny_config(2);
  FitOptions opt;

  opt.num_threads = 1;
  opt.run_dir = run_dir("thr_1").string();
  const FitResult one = fit(cfg, f.bench.train_manifest, f.bench.eval_val_manifest, opt);
  opt.num_threads = 4;
  opt.run_dir = run_dir("thr_4").string();
  const FitResult four = fit(cfg, f.bench.train_manifest, f.bench.eval_val_manifest, opt);
  REQUIRE(one.log.size() == four.log.size());
  for (std::size_t e = 0; e < one.log.size(); ++e) {
    CHECK(one.log[e].loss_total == four.log[e].loss_total);
    CHECK(one.log[e].val_gmiou == four.log[e].val_gmiou);
  }
}

TEST_CASE("resuming from a checkpoint reproduces the straight-through run") {
  const auto& f = fixture();
  FitOptions opt;
  opt.num_threads = 2;

  opt.run_dir = run_dir("resume_full").string();
  const FitResult full = fit(tiny_config(4), f.bench.train_manifest, f.bench.eval_val_manifest,
                             opt);

  opt.run_dir = run_dir("resume_half").string();
  const FitResult half = fit(tiny_config(2), f.bench.train_manifest, f.bench.eval_val_manifest,
                             opt);
  FitOptions resume_opt;
  resume_opt.num_threads = 2;
  resume_opt.run_dir = run_dir("resume_rest").string();
  resume_opt.resume_from = half.last_checkpoint;
  const FitResult rest = fit(tiny_config(4), f.bench.train_manifest, f.bench.eval_val_manifest,
                             resume_opt);

  REQUIRE(full.log.size() == 4);
  REQUIRE(rest.log.size() == 2);
  CHECK(std::abs(full.log[2].loss_total - rest.log[0].loss_total) < 1e-6);
  CHECK(std::abs(full.log[3].loss_total - rest.log[1].loss_total) < 1e-6);
}

TEST_CASE("fit writes the epoch log and checkpoints") {
  const auto& f = fixture();
  FitOptions opt;
  opt.num_threads = 2;
  opt.run_dir = run_dir("artifacts").string();
  const FitResult r = fit(tiny_config(1), f.bench.train_manifest, f.bench.eval_val_manifest,
                          opt);
  CHECK(!r.diverged);
  CHECK(fs::exists(fs::path(opt.run_dir) / "epochs.csv"));
  CHECK(fs::exists(fs::path(opt.run_dir) / "config.json"));
  CHECK(fs::exists(r.best_checkpoint));
  CHECK(fs::exists(r.last_checkpoint));
  const std::string csv = read_file_bytes((fs::path(opt.run_dir) / "epochs.csv").string());
  CHECK(csv.rfind("epoch,loss_total,loss_seg,loss_bce,val_miou_p,val_gfpr,val_gmiou\n", 0) == 0);
}

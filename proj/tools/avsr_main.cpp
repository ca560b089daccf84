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

// Command-line entry point: corpus generation, benchmark construction,
// training, evaluation, and ablation sweeps.
//
// Exit codes: 0 success, 1 usage or validation error, 2 training divergence.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "avsr/checkpoint.hpp"
#include "avsr/corpus.hpp"
#include "avsr/evalharness.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/trainer.hpp"

namespace fs = std::filesystem;

namespace {

std::string env_data_dir() {
  const char* v = std::getenv("AVSR_DATA_DIR");
  return v ? std::string(v) : std::string();
}

avsr::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return avsr::RunConfig{};
  return avsr::RunConfig::from_json_file(path);
}

int cmd_gen_data(const std::string& subset, int clips, int frames, std::uint64_t seed,
                 std::string out_dir) {
  if (out_dir.empty()) {
    const std::string base = env_data_dir();
    if (base.empty())
      throw avsr::ContractError("--out is required (or set AVSR_DATA_DIR)");
    out_dir = (fs::path(base) / subset).string();
  }
  avsr::CorpusOptions opt;
  opt.subset = subset;
  opt.clips = clips;
  opt.frames_per_clip = frames;
  opt.seed = seed;
  const avsr::CorpusSummary summary = avsr::generate_corpus(opt, out_dir);
  std::printf("corpus %s: %d clips (train %d / val %d / test %d), %d frames per clip\n",
              summary.subset.c_str(), summary.clips_total, summary.splits.train,
              summary.splits.val, summary.splits.test, summary.frames_per_clip);
  std::printf("scene classes: %d\n", summary.scene_classes);
  for (const auto& [cat, n] : summary.sounding_clips_per_category)
    std::printf("  sounding clips in %-8s %d\n", (cat + ":").c_str(), n);
  std::printf("written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_build_bench(std::string in_dir, double rho, std::uint64_t seed, std::string out_dir) {
  if (in_dir.empty()) {
    const std::string base = env_data_dir();
    if (base.empty()) throw avsr::ContractError("--in is required (or set AVSR_DATA_DIR)");
    in_dir = base;
  }
  if (out_dir.empty()) out_dir = (fs::path(in_dir) / "bench").string();
  avsr::BenchOptions opt;
  opt.rho = rho;
  opt.seed = seed;
  const avsr::BenchPaths paths = avsr::build_benchmark(in_dir, opt, out_dir);
  const auto train = avsr::load_manifest(paths.train_manifest, false);
  const auto eval_test = avsr::load_manifest(paths.eval_test_manifest, false);
  long neg = 0;
  for (const auto& r : train)
    if (avsr::is_negative(r.condition.kind)) ++neg;
  std::printf("train manifest: %zu records (%ld negative, rho %.3f)\n", train.size(), neg, rho);
  std::printf("eval manifests: %zu test records (4 conditions per clip frame)\n",
              eval_test.size());
  std::printf("written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& run_dir, int threads, const std::string& resume) {
  const avsr::RunConfig cfg = load_config_or_default(config_path);
  avsr::FitOptions opt;
  opt.run_dir = run_dir;
  opt.num_threads = threads;
  opt.resume_from = resume;
  const std::string train_manifest = (fs::path(data_dir) / "train_manifest.jsonl").string();
  const std::string val_manifest = (fs::path(data_dir) / "eval_val_manifest.jsonl").string();
  const avsr::FitResult result = avsr::fit(cfg, train_manifest, val_manifest, opt);
  for (const auto& e : result.log)
    std::printf("epoch %3d  loss %.5f (seg %.5f, sim %.5f)  val mIoU_P %.4f  val G-mIoU %.4f\n",
                e.epoch, e.loss_total, e.loss_seg, e.loss_bce, e.val_miou_p, e.val_gmiou);
  if (result.diverged) {
    std::fprintf(stderr, "training diverged: %s\n", result.divergence_info.c_str());
    return 2;
  }
  std::printf("best epoch %d (val G-mIoU %.4f)\n", result.best_epoch, result.best_val_gmiou);
  std::printf("checkpoints: %s, %s\n", result.best_checkpoint.c_str(),
              result.last_checkpoint.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& manifest,
             const std::string& out_path, const std::string& config_path, bool per_clip,
             int threads) {
  avsr::EvalOptions opt;
  opt.per_clip = per_clip;
  opt.num_threads = threads;
  avsr::RunConfig override_cfg;
  const avsr::RunConfig* override_ptr = nullptr;
  if (!config_path.empty()) {
    override_cfg = avsr::RunConfig::from_json_file(config_path);
    override_ptr = &override_cfg;
  }
  const avsr::MetricsReport report =
      avsr::evaluate_checkpoint(checkpoint, manifest, override_ptr, opt);
  if (!out_path.empty()) {
    fs::create_directories(fs::path(out_path).parent_path());
    report.save_json_file(out_path);
  }
  std::printf("positive mIoU %.4f  F %.4f\n",
              report.condition(avsr::ConditionKind::positive).miou,
              report.condition(avsr::ConditionKind::positive).fscore);
  std::printf("G-mIoU %.4f  G-F %.4f  G-FPR %.5f\n", report.g_miou, report.g_f, report.g_fpr);
  if (!out_path.empty()) std::printf("report written to %s\n", out_path.c_str());
  return 0;
}

int cmd_ablate(const std::string& mode, const std::string& data_dir,
               const std::string& config_path, const std::string& out_dir,
               const std::string& checkpoint, int threads, bool parallel) {
  const avsr::RunConfig base = load_config_or_default(config_path);
  fs::create_directories(out_dir);

  auto print_rows = [](const std::vector<avsr::SweepRow>& rows, const char* col) {
    std::printf("%-24s %8s %8s %8s\n", col, "G-mIoU", "G-F", "G-FPR");
    for (const auto& r : rows)
      std::printf("%-24s %8.4f %8.4f %8.5f\n", r.label.c_str(), r.report.g_miou, r.report.g_f,
                  r.report.g_fpr);
  };

  if (mode == "ratio") {
    print_rows(avsr::ratio_sweep(data_dir, base, avsr::kDefaultRatioLevels, out_dir, threads,
                                 parallel),
               "rho");
  } else if (mode == "guidance") {
    print_rows(avsr::ablation_guidance(data_dir, base, out_dir, threads, parallel), "variant");
  } else if (mode == "head") {
    print_rows(avsr::head_sweep(data_dir, base, out_dir, threads, parallel), "head");
  } else if (mode == "lambda") {
    print_rows(avsr::lambda_sweep(data_dir, base, avsr::kDefaultLambdaLevels, out_dir, threads,
                                  parallel),
               "lambda");
  } else if (mode == "unseen") {
    if (checkpoint.empty()) throw avsr::ContractError("--checkpoint is required for unseen");
    const avsr::LoadedCheckpoint ckpt = avsr::load_checkpoint(checkpoint);
    const avsr::Network net = avsr::network_from_checkpoint(ckpt);
    const auto rows = avsr::unseen_audio_eval(net, data_dir, ckpt.run_config, threads);
    avsr::save_unseen_csv(rows, (fs::path(out_dir) / "unseen_audio.csv").string());
    std::printf("%-12s %8s %8s %8s\n", "class", "mIoU", "F", "FPR");
    for (const auto& r : rows)
      std::printf("%-12s %8.4f %8.4f %8.5f\n", r.class_name.c_str(), r.miou, r.fscore, r.fpr);
  } else if (mode == "hist") {
    if (checkpoint.empty()) throw avsr::ContractError("--checkpoint is required for hist");
    const avsr::LoadedCheckpoint ckpt = avsr::load_checkpoint(checkpoint);
    const avsr::Network net = avsr::network_from_checkpoint(ckpt);
    // data_dir here is a manifest path or a bench dir with a val manifest
    std::string manifest = data_dir;
    if (fs::is_directory(manifest))
      manifest = (fs::path(data_dir) / "eval_val_manifest.jsonl").string();
    const avsr::Dataset ds(manifest);
    const avsr::SimilarityStats stats = avsr::similarity_histogram(net, ds, threads);
    avsr::save_similarity_csv(stats, ds, (fs::path(out_dir) / "similarity_scores.csv").string());
    std::printf("mean sigma(s): positive %.4f, negative %.4f, overlap %.4f\n", stats.mean_pos,
                stats.mean_neg, stats.overlap_coefficient);
  } else {
    throw avsr::ContractError("unknown ablate mode: " + mode);
  }
  std::printf("outputs written to %s\n", out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic audio-visual segmentation lab: corpus generation, four-condition "
               "robustness benchmark, dual-stream training, and evaluation"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Synthesize a corpus of clips");
  std::string gen_subset = "s4";
  int gen_clips = -1;
  int gen_frames = 5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--subset", gen_subset, "s4 or ms3")
      ->check(CLI::IsMember({"s4", "ms3"}));
  gen->add_option("--clips", gen_clips, "total clips (default 480 s4 / 48 ms3)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--frames", gen_frames, "frames per clip")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "corpus seed");
  gen->add_option("--out", gen_out, "output directory (default $AVSR_DATA_DIR/<subset>)");

  // build-bench
  auto* bench = app.add_subcommand("build-bench", "Build train/eval manifests from a corpus");
  std::string bench_in, bench_out;
  double bench_rho = 0.1;
  std::uint64_t bench_seed = 0;
  bench->add_option("--in", bench_in, "corpus directory")->required();
  bench->add_option("--rho", bench_rho, "negative-pair training ratio")
      ->check(CLI::Range(0.0, 0.999));
  bench->add_option("--seed", bench_seed, "benchmark seed");
  bench->add_option("--out", bench_out, "output directory (default <in>/bench)");

  // train
  auto* train = app.add_subcommand("train", "Train a model on a benchmark");
  std::string train_config, train_data, train_out, train_resume;
  int train_threads = 0;
  train->add_option("--config", train_config, "run config JSON");
  train->add_option("--data", train_data, "benchmark directory (from build-bench)")->required();
  train->add_option("--out", train_out, "run directory")->required();
  train->add_option("--threads", train_threads, "worker threads (0 = auto)");
  train->add_option("--resume", train_resume, "checkpoint to resume from");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on an eval manifest");
  std::string ev_ckpt, ev_manifest, ev_out, ev_config;
  bool ev_per_clip = false;
  int ev_threads = 0;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  ev->add_option("--manifest", ev_manifest, "eval manifest")->required();
  ev->add_option("--out", ev_out, "report JSON path");
  ev->add_option("--config", ev_config, "config override JSON");
  ev->add_flag("--per-clip", ev_per_clip, "average per clip instead of per frame");
  ev->add_option("--threads", ev_threads, "worker threads (0 = auto)");

  // ablate
  auto* ab = app.add_subcommand("ablate", "Sweeps and analyses");
  std::string ab_mode, ab_data, ab_config, ab_out, ab_ckpt;
  int ab_threads = 0;
  bool ab_parallel = false;
  ab->add_option("--mode", ab_mode, "ratio|guidance|head|lambda|unseen|hist")->required();
  ab->add_option("--data", ab_data,
                 "corpus dir (sweeps, unseen) or manifest/bench dir (hist)")
      ->required();
  ab->add_option("--config", ab_config, "base run config JSON");
  ab->add_option("--out", ab_out, "output directory")->required();
  ab->add_option("--checkpoint", ab_ckpt, "checkpoint (unseen, hist)");
  ab->add_option("--threads", ab_threads, "worker threads (0 = auto)");
  ab->add_flag("--parallel", ab_parallel, "run sweep configs concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_data(gen_subset, gen_clips, gen_frames, gen_seed, gen_out);
    if (bench->parsed()) return cmd_build_bench(bench_in, bench_rho, bench_seed, bench_out);
    if (train->parsed())
      return cmd_train(train_config, train_data, train_out, train_threads, train_resume);
    if (ev->parsed())
      return cmd_eval(ev_ckpt, ev_manifest, ev_out, ev_config, ev_per_clip, ev_threads);
    if (ab->parsed())
      return cmd_ablate(ab_mode, ab_data, ab_config, ab_out, ab_ckpt, ab_threads, ab_parallel);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

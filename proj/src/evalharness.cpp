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

#include "avsr/evalharness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <map>

#include "avsr/audio_synth.hpp"
#include "avsr/corpus.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/parallel.hpp"
#include "avsr/rng.hpp"
#include "avsr/summation.hpp"

namespace avsr {

namespace fs = std::filesystem;

namespace {

// Contiguous chunks with one private workspace per worker; per-record
// results land in index-addressed slots so aggregation order is fixed.
void for_each_sample_chunked(std::size_t n, int num_threads,
                             const std::function<void(std::size_t, Network::Workspace&)>& fn) {
  const int threads = std::min<int>(resolve_threads(num_threads), static_cast<int>(n));
  if (threads <= 1) {
    Network::Workspace ws;
    for (std::size_t i = 0; i < n; ++i) fn(i, ws);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  const std::size_t chunk = (n + static_cast<std::size_t>(threads) - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t]() {
      try {
        Network::Workspace ws;
        const std::size_t begin = static_cast<std::size_t>(t) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        for (std::size_t i = begin; i < end; ++i) fn(i, ws);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct PerRecordScores {
  double iou = 0.0;
  double fscore = 0.0;
  double fpr = 0.0;
};

MetricsReport report_from_predictions(const Dataset& ds, const std::vector<Mask>& preds,
                                      const RunConfig& cfg, const EvalOptions& options,
                                      const std::string& fingerprint) {
  std::vector<ConditionMetrics> cms;
  const ConditionKind kinds[4] = {ConditionKind::positive, ConditionKind::silence,
                                  ConditionKind::noise, ConditionKind::offscreen};
  for (ConditionKind kind : kinds) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.sample(i).kind == kind) idx.push_back(i);
    if (idx.empty())
      throw ContractError(std::string("manifest has no records for condition ") +
                          to_string(kind));

    auto ref_of = [&](std::size_t i) -> const Mask& {
      const LoadedSample& s = ds.sample(i);
      return kind == ConditionKind::positive ? *s.gt : *s.pos_ref;
    };

    if (!options.per_clip) {
      std::vector<Mask> pred_list, ref_list;
      pred_list.reserve(idx.size());
      ref_list.reserve(idx.size());
      for (std::size_t i : idx) {
        pred_list.push_back(preds[i]);
        ref_list.push_back(ref_of(i));
      }
      cms.push_back(condition_metrics(pred_list, ref_list, kind, cfg.f_beta_sq));
    } else {
      std::map<std::string, std::vector<std::size_t>> by_clip;
      for (std::size_t i : idx) by_clip[ds.sample(i).record->clip_id].push_back(i);
      KahanSum miou_sum, f_sum, fpr_sum;
      for (const auto& [clip, members] : by_clip) {
        KahanSum ci, cf, cr;
        for (std::size_t i : members) {
          ci.add(iou(preds[i], ref_of(i)));
          cf.add(f_score(preds[i], ref_of(i), cfg.f_beta_sq));
          if (is_negative(kind)) cr.add(fpr(preds[i]));
        }
        const double inv = 1.0 / static_cast<double>(members.size());
        miou_sum.add(ci.value() * inv);
        f_sum.add(cf.value() * inv);
        if (is_negative(kind)) fpr_sum.add(cr.value() * inv);
      }
      ConditionMetrics cm;
      cm.condition = kind;
      cm.n_samples = static_cast<long>(by_clip.size());
      const double inv = 1.0 / static_cast<double>(by_clip.size());
      cm.miou = miou_sum.value() * inv;
      cm.fscore = f_sum.value() * inv;
      cm.fpr = is_negative(kind) ? fpr_sum.value() * inv : 0.0;
      cms.push_back(cm);
    }
  }
  MetricsReport report = build_report(cms);
  report.config_fingerprint = fingerprint;
  return report;
}

}  // namespace

MetricsReport evaluate_network(const Network& net, const Dataset& ds, const RunConfig& cfg,
                               const EvalOptions& options, const std::string& fingerprint_extra) {
  std::vector<Mask> preds(ds.size());
  for_each_sample_chunked(ds.size(), options.num_threads,
                          [&](std::size_t i, Network::Workspace& ws) {
                            const LoadedSample& s = ds.sample(i);
                            net.forward(ws, *s.frame, *s.audio, false, 0);
                            preds[i] = binarize(ws.prob, cfg.binarize_threshold);
                          });
  std::string fp = cfg.fingerprint();
  if (!fingerprint_extra.empty()) fp += ":" + fingerprint_extra;
  return report_from_predictions(ds, preds, cfg, options, fp);
}

MetricsReport evaluate_predictor(const std::function<Mask(const LoadedSample&)>& predict,
                                 const Dataset& ds, const RunConfig& cfg,
                                 const std::string& fingerprint, const EvalOptions& options) {
  std::vector<Mask> preds(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) preds[i] = predict(ds.sample(i));
  return report_from_predictions(ds, preds, cfg, options, fingerprint);
}

MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::string& manifest_path,
                                  const RunConfig* config_override, const EvalOptions& options) {
  const LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
  RunConfig cfg = ckpt.run_config;
  if (config_override) {
    if (config_override->audio_dim != ckpt.model_config.audio_dim ||
        config_override->similarity_head != ckpt.model_config.head)
      throw ContractError("config override does not match the checkpoint's architecture");
    cfg = *config_override;
  }
  const Network net = network_from_checkpoint(ckpt);
  const Dataset ds(manifest_path);
  char manifest_hash[32];
  std::snprintf(manifest_hash, sizeof(manifest_hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file_bytes(manifest_path))));
  const std::string extra = checkpoint_digest(checkpoint_path) + ":" + manifest_hash;
  return evaluate_network(net, ds, cfg, options, extra);
}

SimilarityStats similarity_histogram(const Network& net, const Dataset& ds, int num_threads) {
  SimilarityStats stats;
  stats.sigma_scores.assign(ds.size(), 0.0);
  stats.labels.assign(ds.size(), 0);
  for_each_sample_chunked(ds.size(), num_threads, [&](std::size_t i, Network::Workspace& ws) {
    const LoadedSample& s = ds.sample(i);
    net.forward(ws, *s.frame, *s.audio, false, 0);
    stats.sigma_scores[i] = sigmoid_stable(ws.score);
    stats.labels[i] = s.label;
  });

  KahanSum pos, neg;
  long n_pos = 0, n_neg = 0;
  constexpr int kBins = 20;
  std::array<double, kBins> hist_pos{}, hist_neg{};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double v = stats.sigma_scores[i];
    const int bin = std::min(kBins - 1, static_cast<int>(v * kBins));
    if (stats.labels[i]) {
      pos.add(v);
      ++n_pos;
      hist_pos[static_cast<std::size_t>(bin)] += 1.0;
    } else {
      neg.add(v);
      ++n_neg;
      hist_neg[static_cast<std::size_t>(bin)] += 1.0;
    }
  }
  stats.mean_pos = n_pos ? pos.value() / static_cast<double>(n_pos) : 0.0;
  stats.mean_neg = n_neg ? neg.value() / static_cast<double>(n_neg) : 0.0;
  if (n_pos && n_neg) {
    double overlap = 0.0;
    for (int b = 0; b < kBins; ++b)
      overlap += std::min(hist_pos[static_cast<std::size_t>(b)] / static_cast<double>(n_pos),
                          hist_neg[static_cast<std::size_t>(b)] / static_cast<double>(n_neg));
    stats.overlap_coefficient = overlap;
  }
  return stats;
}

void save_similarity_csv(const SimilarityStats& stats, const Dataset& ds,
                         const std::string& path) {
  std::string out = "sample_id,label,sigma_score\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += csv_row({ds.sample(i).record->sample_id, std::to_string(stats.labels[i]),
                    fmt_double(stats.sigma_scores[i])});
  }
  write_file_bytes(path, out);
}

std::vector<UnseenRow> unseen_audio_eval(const Network& net, const std::string& corpus_dir,
                                         const RunConfig& cfg, int num_threads) {
  const CategoryTaxonomy taxonomy =
      CategoryTaxonomy::load_json_file((fs::path(corpus_dir) / "taxonomy.json").string());
  const CorpusMeta meta =
      CorpusMeta::load_json_file((fs::path(corpus_dir) / "corpus_meta.json").string());
  const Dataset ds((fs::path(corpus_dir) / "test" / "clips.jsonl").string());

  std::vector<UnseenRow> rows;
  for (const auto* cls : taxonomy.held_out_classes()) {
    std::vector<double> ious(ds.size()), fscores(ds.size()), fprs(ds.size());
    for_each_sample_chunked(ds.size(), num_threads, [&](std::size_t i, Network::Workspace& ws) {
      const LoadedSample& s = ds.sample(i);
      const Spectrogram audio = gen_positive_audio(
          {cls}, meta.spec_frames, meta.spec_bins,
          child_seed(cfg.seed, s.record->sample_id + "|" + cls->class_name));
      net.forward(ws, *s.frame, audio, false, 0);
      const Mask pred = binarize(ws.prob, cfg.binarize_threshold);
      ious[i] = iou(pred, *s.pos_ref);
      fscores[i] = f_score(pred, *s.pos_ref, cfg.f_beta_sq);
      fprs[i] = fpr(pred);
    });
    UnseenRow row;
    row.class_name = cls->class_name;
    row.n_samples = static_cast<long>(ds.size());
    row.miou = kahan_mean(ious);
    row.fscore = kahan_mean(fscores);
    row.fpr = kahan_mean(fprs);
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_unseen_csv(const std::vector<UnseenRow>& rows, const std::string& path) {
  std::string out = "class_name,miou,fscore,fpr,n_samples\n";
  for (const auto& r : rows)
    out += csv_row({r.class_name, fmt_double(r.miou), fmt_double(r.fscore), fmt_double(r.fpr),
                    std::to_string(r.n_samples)});
  write_file_bytes(path, out);
}

namespace {

std::string corpus_fingerprint(const std::string& corpus_dir) {
  std::uint64_t h = fnv1a64(read_file_bytes((fs::path(corpus_dir) / "corpus_meta.json").string()));
  for (const char* split : {"train", "val", "test"}) {
    const auto p = fs::path(corpus_dir) / split / "clips.jsonl";
    h = splitmix64(h ^ fnv1a64(read_file_bytes(p.string())));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TrainedRun train_and_eval(const std::string& corpus_dir, const RunConfig& cfg,
                          const std::string& workdir, int num_threads) {
  fs::create_directories(workdir);
  const std::string key_path = (fs::path(workdir) / "key.json").string();
  const std::string report_path = (fs::path(workdir) / "report.json").string();
  const std::string best_ckpt =
      (fs::path(workdir) / "run" / "checkpoint_best.avsc").string();

  nlohmann::ordered_json key;
  key["config"] = cfg.to_json();
  key["corpus"] = corpus_fingerprint(corpus_dir);
  const std::string key_bytes = key.dump(2) + "\n";

  TrainedRun run;
  run.cfg = cfg;
  run.workdir = workdir;
  run.best_checkpoint = best_ckpt;

  if (fs::exists(key_path) && fs::exists(report_path) && fs::exists(best_ckpt) &&
      read_file_bytes(key_path) == key_bytes) {
    run.test_report = MetricsReport::from_json(
        nlohmann::ordered_json::parse(read_file_bytes(report_path)));
    run.from_cache = true;
    return run;
  }

  const std::string bench_dir = (fs::path(workdir) / "bench").string();
  BenchOptions bench_opt;
  bench_opt.rho = cfg.negative_ratio;
  bench_opt.seed = cfg.seed;
  const BenchPaths bench = build_benchmark(corpus_dir, bench_opt, bench_dir);

  FitOptions fit_opt;
  fit_opt.run_dir = (fs::path(workdir) / "run").string();
  fit_opt.num_threads = num_threads;
  const FitResult fit_result = fit(cfg, bench.train_manifest, bench.eval_val_manifest, fit_opt);
  if (fit_result.diverged)
    throw std::runtime_error("training diverged: " + fit_result.divergence_info);

  EvalOptions eval_opt;
  eval_opt.num_threads = num_threads;
  run.test_report = evaluate_checkpoint(fit_result.best_checkpoint, bench.eval_test_manifest,
                                        nullptr, eval_opt);
  run.test_report.save_json_file(report_path);
  write_file_bytes(key_path, key_bytes);
  return run;
}

namespace {

std::vector<SweepRow> run_sweep(const std::string& corpus_dir,
                                const std::vector<std::pair<std::string, RunConfig>>& configs,
                                const std::string& out_dir, int num_threads, bool parallel) {
  fs::create_directories(out_dir);
  std::vector<SweepRow> rows(configs.size());
  auto one = [&](std::size_t i, int threads) {
    const auto& [label, cfg] = configs[i];
    const std::string workdir = (fs::path(out_dir) / ("run_" + label)).string();
    const TrainedRun run = train_and_eval(corpus_dir, cfg, workdir, threads);
    rows[i] = SweepRow{label, cfg, run.test_report};
  };
  if (parallel && configs.size() > 1) {
    const int total = resolve_threads(num_threads);
    const int per = std::max(1, total / static_cast<int>(configs.size()));
    std::vector<std::future<void>> futs;
    for (std::size_t i = 0; i < configs.size(); ++i)
      futs.push_back(std::async(std::launch::async, one, i, per));
    for (auto& f : futs) f.get();
  } else {
    for (std::size_t i = 0; i < configs.size(); ++i) one(i, num_threads);
  }
  return rows;
}

std::string trim_number(double v) {
  std::string s = fmt_double(v);
  return s;
}

}  // namespace

std::vector<SweepRow> ratio_sweep(const std::string& corpus_dir, const RunConfig& base,
                                  const std::vector<double>& rhos, const std::string& out_dir,
                                  int num_threads, bool parallel) {
  std::vector<std::pair<std::string, RunConfig>> configs;
  for (double rho : rhos) {
    RunConfig cfg = base;
    cfg.negative_ratio = rho;
    // The all-positive row is the plain baseline: with no negative pairs the
    // contrastive loss would only push every score toward 1, which the
    // published ratio study does not include.
    if (rho == 0.0) cfg.lambda_weight = 0.0;
    configs.emplace_back("rho" + trim_number(rho), cfg);
  }
  auto rows = run_sweep(corpus_dir, configs, out_dir, num_threads, parallel);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].label = trim_number(rhos[i]);
  save_sweep_csv(rows, "rho", (fs::path(out_dir) / "ratio_sweep.csv").string());
  return rows;
}

std::vector<SweepRow> ablation_guidance(const std::string& corpus_dir, const RunConfig& base,
                                        const std::string& out_dir, int num_threads,
                                        bool parallel) {
  std::vector<std::pair<std::string, RunConfig>> configs;
  {
    RunConfig cfg = base;
    cfg.negative_ratio = 0.0;
    cfg.lambda_weight = 0.0;
    configs.emplace_back("baseline", cfg);
  }
  {
    RunConfig cfg = base;
    cfg.lambda_weight = 0.0;
    configs.emplace_back("negatives_only", cfg);
  }
  configs.emplace_back("negatives_plus_guidance", base);
  auto rows = run_sweep(corpus_dir, configs, out_dir, num_threads, parallel);
  save_sweep_csv(rows, "variant", (fs::path(out_dir) / "guidance_ablation.csv").string());
  return rows;
}

std::vector<SweepRow> head_sweep(const std::string& corpus_dir, const RunConfig& base,
                                 const std::string& out_dir, int num_threads, bool parallel) {
  std::vector<std::pair<std::string, RunConfig>> configs;
  for (SimilarityHeadKind head : {SimilarityHeadKind::cosine, SimilarityHeadKind::euclidean,
                                  SimilarityHeadKind::concat}) {
    RunConfig cfg = base;
    cfg.similarity_head = head;
    configs.emplace_back(to_string(head), cfg);
  }
  auto rows = run_sweep(corpus_dir, configs, out_dir, num_threads, parallel);
  save_sweep_csv(rows, "head", (fs::path(out_dir) / "head_sweep.csv").string());
  return rows;
}

std::vector<SweepRow> lambda_sweep(const std::string& corpus_dir, const RunConfig& base,
                                   const std::vector<double>& lambdas,
                                   const std::string& out_dir, int num_threads, bool parallel) {
  std::vector<std::pair<std::string, RunConfig>> configs;
  for (double lambda : lambdas) {
    RunConfig cfg = base;
    cfg.lambda_weight = lambda;
    configs.emplace_back("lambda" + trim_number(lambda), cfg);
  }
  auto rows = run_sweep(corpus_dir, configs, out_dir, num_threads, parallel);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].label = trim_number(lambdas[i]);
  save_sweep_csv(rows, "lambda", (fs::path(out_dir) / "lambda_sweep.csv").string());
  return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& label_column,
                    const std::string& path) {
  std::string out = label_column +
                    ",seed,negative_ratio,lambda,similarity_head"
                    ",miou_positive,fscore_positive"
                    ",miou_silence,fscore_silence,fpr_silence"
                    ",miou_noise,fscore_noise,fpr_noise"
                    ",miou_offscreen,fscore_offscreen,fpr_offscreen"
                    ",g_miou,g_f,g_fpr\n";
  for (const auto& r : rows) {
    std::vector<std::string> fields = {r.label, std::to_string(r.cfg.seed),
                                       fmt_double(r.cfg.negative_ratio),
                                       fmt_double(r.cfg.lambda_weight),
                                       to_string(r.cfg.similarity_head)};
    for (const auto& cm : r.report.per_condition) {
      fields.push_back(fmt_double(cm.miou));
      fields.push_back(fmt_double(cm.fscore));
      if (is_negative(cm.condition)) fields.push_back(fmt_double(cm.fpr));
    }
    fields.push_back(fmt_double(r.report.g_miou));
    fields.push_back(fmt_double(r.report.g_f));
    fields.push_back(fmt_double(r.report.g_fpr));
    out += csv_row(fields);
  }
  write_file_bytes(path, out);
}

}  // namespace avsr

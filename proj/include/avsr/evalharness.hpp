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

#ifndef AVSR_EVALHARNESS_HPP
#define AVSR_EVALHARNESS_HPP

#include <functional>
#include <string>
#include <vector>

#include "avsr/dataset.hpp"
#include "avsr/metrics.hpp"
#include "avsr/trainer.hpp"

namespace avsr {

struct EvalOptions {
  bool per_clip = false;  // average per clip before the condition mean
  int num_threads = 0;
};

// Four-condition evaluation: binarize at the config threshold, score
// positives against their masks and negatives against the clips' original
// sounding-object masks, then build the global report. Deterministic.
MetricsReport evaluate_network(const Network& net, const Dataset& ds, const RunConfig& cfg,
                               const EvalOptions& options = {},
                               const std::string& fingerprint_extra = "");

// Same protocol for an arbitrary mask predictor (oracles, baselines).
MetricsReport evaluate_predictor(const std::function<Mask(const LoadedSample&)>& predict,
                                 const Dataset& ds, const RunConfig& cfg,
                                 const std::string& fingerprint,
                                 const EvalOptions& options = {});

// Loads the checkpoint (and its embedded config unless overridden) and
// evaluates the manifest. Repeated calls are byte-identical.
MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::string& manifest_path,
                                  const RunConfig* config_override = nullptr,
                                  const EvalOptions& options = {});

struct SimilarityStats {
  std::vector<double> sigma_scores;  // sigmoid(score), dataset order
  std::vector<std::uint8_t> labels;  // 1 positive pair, 0 negative
  double mean_pos = 0.0;
  double mean_neg = 0.0;
  double overlap_coefficient = 0.0;  // histogram overlap of the two sides
};

SimilarityStats similarity_histogram(const Network& net, const Dataset& ds,
                                     int num_threads = 0);
void save_similarity_csv(const SimilarityStats& stats, const Dataset& ds,
                         const std::string& path);

struct UnseenRow {
  std::string class_name;
  double miou = 0.0;
  double fscore = 0.0;
  double fpr = 0.0;
  long n_samples = 0;
};

// Pairs the corpus test frames with audio from the taxonomy's held-out
// classes; a robust model suppresses everything.
std::vector<UnseenRow> unseen_audio_eval(const Network& net, const std::string& corpus_dir,
                                         const RunConfig& cfg, int num_threads = 0);
void save_unseen_csv(const std::vector<UnseenRow>& rows, const std::string& path);

// Builds a benchmark at the config's negative ratio, trains, evaluates the
// best checkpoint on the test manifest, and caches everything under workdir;
// identical (corpus, config) pairs are reused.
struct TrainedRun {
  RunConfig cfg;
  std::string workdir;
  std::string best_checkpoint;
  MetricsReport test_report;
  bool from_cache = false;
};
TrainedRun train_and_eval(const std::string& corpus_dir, const RunConfig& cfg,
                          const std::string& workdir, int num_threads = 0);

struct SweepRow {
  std::string label;
  RunConfig cfg;
  MetricsReport report;
};

std::vector<SweepRow> ratio_sweep(const std::string& corpus_dir, const RunConfig& base,
                                  const std::vector<double>& rhos, const std::string& out_dir,
                                  int num_threads = 0, bool parallel = false);
std::vector<SweepRow> ablation_guidance(const std::string& corpus_dir, const RunConfig& base,
                                        const std::string& out_dir, int num_threads = 0,
                                        bool parallel = false);
std::vector<SweepRow> head_sweep(const std::string& corpus_dir, const RunConfig& base,
                                 const std::string& out_dir, int num_threads = 0,
                                 bool parallel = false);
std::vector<SweepRow> lambda_sweep(const std::string& corpus_dir, const RunConfig& base,
                                   const std::vector<double>& lambdas,
                                   const std::string& out_dir, int num_threads = 0,
                                   bool parallel = false);

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& label_column,
                    const std::string& path);

inline const std::vector<double> kDefaultRatioLevels = {0.0, 0.1, 0.2, 0.3};
inline const std::vector<double> kDefaultLambdaLevels = {0.2, 0.4, 0.6, 0.8, 1.0};

}  // namespace avsr

#endif  // AVSR_EVALHARNESS_HPP

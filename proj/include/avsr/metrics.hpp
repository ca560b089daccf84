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

#ifndef AVSR_METRICS_HPP
#define AVSR_METRICS_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "avsr/manifest.hpp"
#include "avsr/mask.hpp"

namespace avsr {

// Threshold is inclusive: prob == theta activates the pixel.
Mask binarize(const ProbMask& p, double theta);

// Jaccard index. Both masks empty -> 1.
double iou(const Mask& pred, const Mask& gt);

// Weighted F-measure with additive smoothing eps = 1e-8 in the denominator.
// Both masks empty -> 1; no true positives otherwise -> 0.
double f_score(const Mask& pred, const Mask& gt, double beta_sq);

// Fraction of activated pixels; the false-positive rate of a prediction made
// under a negative audio condition.
double fpr(const Mask& pred);

struct ConditionMetrics {
  ConditionKind condition = ConditionKind::positive;
  double miou = 0.0;
  double fscore = 0.0;
  double fpr = 0.0;  // 0 for the positive condition
  long n_samples = 0;
};

// Per-sample means over aligned (pred, ref) lists. For negative conditions
// the refs are the clips' original sounding-object masks, so mIoU/F measure
// residual object segmentation; fpr is reported for negative kinds only.
ConditionMetrics condition_metrics(std::span<const Mask> preds, std::span<const Mask> refs,
                                   ConditionKind kind, double beta_sq = 0.3);

// Harmonic coupling of positive accuracy with negative suppression.
// miou_n is the mean of the three negative-condition mIoUs.
double g_miou(double miou_p, double miou_n);
double g_f(double f_p, double f_n);

// Mean false-positive rate over all negative samples.
double g_fpr(std::span<const double> negative_fprs);

struct MetricsReport {
  std::array<ConditionMetrics, 4> per_condition;  // positive, silence, noise, offscreen
  double g_miou = 0.0;
  double g_f = 0.0;
  double g_fpr = 0.0;
  std::string config_fingerprint;

  nlohmann::ordered_json to_json() const;
  void save_json_file(const std::string& path) const;
  static MetricsReport from_json(const nlohmann::ordered_json& j);

  const ConditionMetrics& condition(ConditionKind kind) const;
};

// Fills the global metrics from exactly one ConditionMetrics per kind
// (any input order; the report stores positive, silence, noise, offscreen).
MetricsReport build_report(std::span<const ConditionMetrics> per_condition);

// True when the stored global metrics equal the ones recomputed from the
// per-condition entries (within tol).
bool report_globals_consistent(const MetricsReport& report, double tol = 1e-12);

}  // namespace avsr

#endif  // AVSR_METRICS_HPP

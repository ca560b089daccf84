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

#include "avsr/metrics.hpp"

#include <cmath>
#include <fstream>

#include "avsr/summation.hpp"

namespace avsr {

namespace {

constexpr double kFScoreEps = 1e-8;

void require_same_dims(const Mask& a, const Mask& b) {
  if (a.height != b.height || a.width != b.width)
    throw ContractError("mask dimension mismatch");
}

}  // namespace

Mask binarize(const ProbMask& p, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw ContractError("binarize threshold must be in (0,1)");
  Mask m(p.height, p.width);
  for (std::size_t i = 0; i < p.probs.size(); ++i) m.bits[i] = p.probs[i] >= theta ? 1 : 0;
  return m;
}

double iou(const Mask& pred, const Mask& gt) {
  require_same_dims(pred, gt);
  long inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    inter += pred.bits[i] & gt.bits[i];
    uni += pred.bits[i] | gt.bits[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double f_score(const Mask& pred, const Mask& gt, double beta_sq) {
  require_same_dims(pred, gt);
  if (!(beta_sq > 0.0)) throw ContractError("beta_sq must be > 0");
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    tp += pred.bits[i] & gt.bits[i];
    fp += pred.bits[i] & (1 - gt.bits[i]);
    fn += (1 - pred.bits[i]) & gt.bits[i];
  }
  if (tp == 0) return (fp == 0 && fn == 0) ? 1.0 : 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return (1.0 + beta_sq) * precision * recall / (beta_sq * precision + recall + kFScoreEps);
}

double fpr(const Mask& pred) {
  return static_cast<double>(pred.foreground_count()) /
         static_cast<double>(pred.pixel_count());
}

ConditionMetrics condition_metrics(std::span<const Mask> preds, std::span<const Mask> refs,
                                   ConditionKind kind, double beta_sq) {
  if (preds.empty()) throw ContractError("condition_metrics needs at least one sample");
  if (preds.size() != refs.size())
    throw ContractError("condition_metrics lists are not aligned");
  KahanSum si, sf, sr;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    si.add(iou(preds[i], refs[i]));
    sf.add(f_score(preds[i], refs[i], beta_sq));
    if (is_negative(kind)) sr.add(fpr(preds[i]));
  }
  ConditionMetrics cm;
  cm.condition = kind;
  cm.n_samples = static_cast<long>(preds.size());
  cm.miou = si.value() / static_cast<double>(preds.size());
  cm.fscore = sf.value() / static_cast<double>(preds.size());
  cm.fpr = is_negative(kind) ? sr.value() / static_cast<double>(preds.size()) : 0.0;
  return cm;
}

namespace {

double harmonic_pair(double a, double b) {
  const double denom = a + b;
  if (denom == 0.0) return 0.0;
  return 2.0 * a * b / denom;
}

}  // namespace

double g_miou(double miou_p, double miou_n) { return harmonic_pair(miou_p, 1.0 - miou_n); }

double g_f(double f_p, double f_n) { return harmonic_pair(f_p, 1.0 - f_n); }

double g_fpr(std::span<const double> negative_fprs) {
  if (negative_fprs.empty()) throw ContractError("g_fpr needs at least one sample");
  return kahan_mean(negative_fprs);
}

const ConditionMetrics& MetricsReport::condition(ConditionKind kind) const {
  for (const auto& cm : per_condition)
    if (cm.condition == kind) return cm;
  throw ContractError("report is missing a condition");
}

MetricsReport build_report(std::span<const ConditionMetrics> per_condition) {
  if (per_condition.size() != 4)
    throw ContractError("build_report needs exactly one entry per condition");
  MetricsReport report;
  const ConditionKind order[4] = {ConditionKind::positive, ConditionKind::silence,
                                  ConditionKind::noise, ConditionKind::offscreen};
  for (int k = 0; k < 4; ++k) {
    bool found = false;
    for (const auto& cm : per_condition) {
      if (cm.condition == order[k]) {
        if (found) throw ContractError("duplicate condition in build_report");
        report.per_condition[k] = cm;
        found = true;
      }
    }
    if (!found)
      throw ContractError(std::string("missing condition: ") + to_string(order[k]));
  }

  const auto& pos = report.per_condition[0];
  KahanSum miou_n, f_n;
  double fpr_weighted = 0.0;
  long n_neg = 0;
  for (int k = 1; k < 4; ++k) {
    miou_n.add(report.per_condition[k].miou);
    f_n.add(report.per_condition[k].fscore);
    fpr_weighted += report.per_condition[k].fpr * static_cast<double>(report.per_condition[k].n_samples);
    n_neg += report.per_condition[k].n_samples;
  }
  report.g_miou = g_miou(pos.miou, miou_n.value() / 3.0);
  report.g_f = g_f(pos.fscore, f_n.value() / 3.0);
  report.g_fpr = n_neg > 0 ? fpr_weighted / static_cast<double>(n_neg) : 0.0;
  return report;
}

bool report_globals_consistent(const MetricsReport& report, double tol) {
  const MetricsReport rebuilt = build_report(report.per_condition);
  return std::abs(rebuilt.g_miou - report.g_miou) <= tol &&
         std::abs(rebuilt.g_f - report.g_f) <= tol &&
         std::abs(rebuilt.g_fpr - report.g_fpr) <= tol;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& cm : per_condition) {
    nlohmann::ordered_json e;
    e["condition"] = to_string(cm.condition);
    e["miou"] = cm.miou;
    e["fscore"] = cm.fscore;
    e["fpr"] = cm.fpr;
    e["n_samples"] = cm.n_samples;
    arr.push_back(e);
  }
  j["per_condition"] = arr;
  j["g_miou"] = g_miou;
  j["g_f"] = g_f;
  j["g_fpr"] = g_fpr;
  j["config_fingerprint"] = config_fingerprint;
  return j;
}

void MetricsReport::save_json_file(const std::string& path) const {
  std::string bytes = to_json().dump(2) + "\n";
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

MetricsReport MetricsReport::from_json(const nlohmann::ordered_json& j) {
  MetricsReport r;
  int k = 0;
  for (const auto& e : j.at("per_condition")) {
    ConditionMetrics cm;
    cm.condition = condition_kind_from_string(e.at("condition").get<std::string>());
    cm.miou = e.at("miou").get<double>();
    cm.fscore = e.at("fscore").get<double>();
    cm.fpr = e.at("fpr").get<double>();
    cm.n_samples = e.at("n_samples").get<long>();
    if (k < 4) r.per_condition[k++] = cm;
  }
  r.g_miou = j.at("g_miou").get<double>();
  r.g_f = j.at("g_f").get<double>();
  r.g_fpr = j.at("g_fpr").get<double>();
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  return r;
}

}  // namespace avsr

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

#include "avsr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "avsr/network.hpp"
#include "avsr/summation.hpp"

namespace avsr {

namespace {

void require_same_dims(const ProbMask& p, const Mask& m) {
  if (p.height != m.height || p.width != m.width)
    throw ContractError("prediction/mask dimension mismatch");
}

double clampp(double p) { return std::clamp(p, kProbClampEps, 1.0 - kProbClampEps); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double seg_loss(const ProbMask& pred, const Mask& gt) {
  require_same_dims(pred, gt);
  KahanSum s;
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    const double p = clampp(pred.probs[i]);
    s.add(gt.bits[i] ? -std::log(p) : -std::log(1.0 - p));
  }
  return s.value() / static_cast<double>(pred.probs.size());
}

std::vector<double> seg_loss_grad_wrt_prob(const ProbMask& pred, const Mask& gt) {
  require_same_dims(pred, gt);
  const double n = static_cast<double>(pred.probs.size());
  std::vector<double> g(pred.probs.size(), 0.0);
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    const double p = pred.probs[i];
    if (p <= kProbClampEps || p >= 1.0 - kProbClampEps) continue;  // clamp region
    g[i] = (gt.bits[i] ? -1.0 / p : 1.0 / (1.0 - p)) / n;
  }
  return g;
}

void seg_loss_grad_wrt_logit(const ProbMask& pred, const Mask& gt, double scale,
                             std::vector<double>& out) {
  require_same_dims(pred, gt);
  const double n = static_cast<double>(pred.probs.size());
  out.assign(pred.probs.size(), 0.0);
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    const double p = pred.probs[i];
    if (p <= kProbClampEps || p >= 1.0 - kProbClampEps) continue;
    out[i] = scale * (p - static_cast<double>(gt.bits[i])) / n;
  }
}

double sim_bce_term(double score, int label) {
  // -log sigmoid(s) = softplus(-s); -log(1 - sigmoid(s)) = softplus(s)
  return label ? softplus(-score) : softplus(score);
}

double sim_bce_grad(double score, int label) {
  return sigmoid_stable(score) - static_cast<double>(label);
}

double sim_bce_loss(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.empty()) throw ContractError("sim_bce_loss needs a non-empty batch");
  if (scores.size() != labels.size()) throw ContractError("scores/labels are not aligned");
  KahanSum s;
  for (std::size_t i = 0; i < scores.size(); ++i)
    s.add(sim_bce_term(scores[i], labels[i]));
  return s.value() / static_cast<double>(scores.size());
}

double total_loss(double l_bce, double l_seg, double lambda) {
  if (!(lambda >= 0.0)) throw ContractError("lambda must be >= 0");
  return lambda * l_bce + l_seg;
}

}  // namespace avsr

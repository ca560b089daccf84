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

#ifndef AVSR_LOSSES_HPP
#define AVSR_LOSSES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "avsr/mask.hpp"

namespace avsr {

constexpr double kProbClampEps = 1e-7;

// Pixel-mean binary cross-entropy between a probability map and a binary
// mask, with probabilities clamped to [eps, 1-eps].
double seg_loss(const ProbMask& pred, const Mask& gt);

// dL/dp per pixel (zero where the clamp is active). For gradient checks.
std::vector<double> seg_loss_grad_wrt_prob(const ProbMask& pred, const Mask& gt);

// d(seg_loss)/d(logit) per pixel, scaled by `scale`, assuming pred = sigmoid
// of the logits. Zero where the clamp saturates the probability.
void seg_loss_grad_wrt_logit(const ProbMask& pred, const Mask& gt, double scale,
                             std::vector<double>& out);

// Batch-mean contrastive BCE over similarity scores: positives push
// sigmoid(s) toward 1, negatives toward 0. Evaluated in log-space so
// saturated-correct scores give exactly ~0 loss.
double sim_bce_loss(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Single-pair term and its d/ds = sigmoid(s) - y.
double sim_bce_term(double score, int label);
double sim_bce_grad(double score, int label);

// lambda * l_bce + l_seg.
double total_loss(double l_bce, double l_seg, double lambda);

}  // namespace avsr

#endif  // AVSR_LOSSES_HPP

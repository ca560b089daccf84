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
#include <vector>

#include "avsr/losses.hpp"
#include "avsr/network.hpp"
#include "avsr/rng.hpp"

using namespace avsr;

namespace {

ProbMask prob_of(int h, int w, double value) {
  ProbMask p(h, w);
  for (auto& v : p.probs) v = value;
  return p;
}

}  // namespace

TEST_CASE("segmentation loss on exact predictions is at clamp level") {
  Mask gt(4, 4);
  for (int i = 0; i < 8; ++i) gt.bits[static_cast<std::size_t>(i)] = 1;
  ProbMask exact(4, 4);
  for (std::size_t i = 0; i < exact.probs.size(); ++i)
    exact.probs[i] = gt.bits[i] ? 1.0 : 0.0;
  const double loss = seg_loss(exact, gt);
  CHECK(loss < 1e-6);
  CHECK(loss > 0.0);  // clamped, never exactly zero
}

TEST_CASE("uniform half predictions cost ln 2 per pixel") {
  Mask gt(8, 8);
  gt.bits[5] = 1;
  gt.bits[40] = 1;
  CHECK(seg_loss(prob_of(8, 8, 0.5), gt) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("segmentation loss rejects mismatched dimensions") {
  CHECK_THROWS_AS(seg_loss(ProbMask(4, 4), Mask(4, 5)), ContractError);
}

TEST_CASE("segmentation loss gradient matches finite differences") {
  Rng rng(31);
  Mask gt(6, 6);
  ProbMask pred(6, 6);
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    gt.bits[i] = rng.uniform() < 0.5 ? 1 : 0;
    pred.probs[i] = 0.05 + 0.9 * rng.uniform();
  }
  const std::vector<double> grad = seg_loss_grad_wrt_prob(pred, gt);
  for (std::size_t i = 0; i < pred.probs.size(); ++i) {
    const double h = 1e-7;
    const double orig = pred.probs[i];
    pred.probs[i] = orig + h;
    const double lp = seg_loss(pred, gt);
    pred.probs[i] = orig - h;
    const double lm = seg_loss(pred, gt);
    pred.probs[i] = orig;
    const double numeric = (lp - lm) / (2.0 * h);
    CHECK(std::abs(grad[i] - numeric) / std::max({std::abs(grad[i]), std::abs(numeric), 1e-8}) <
          1e-4);
  }
}

TEST_CASE("similarity BCE matches its closed forms") {
  const std::vector<double> zero = {0.0};
  const std::vector<std::uint8_t> pos = {1};
  CHECK(sim_bce_loss(zero, pos) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const std::vector<double> confident = {20.0};
  CHECK(sim_bce_loss(confident, pos) < 1e-8);

  const std::vector<double> mixed = {20.0, -20.0};
  const std::vector<std::uint8_t> labels = {1, 0};
  CHECK(sim_bce_loss(mixed, labels) < 1e-8);

  // saturated-wrong pairs cost |s|
  const std::vector<double> wrong = {-30.0};
  CHECK(sim_bce_loss(wrong, pos) == doctest::Approx(30.0).epsilon(1e-6));

  const std::vector<double> none;
  const std::vector<std::uint8_t> no_labels;
  CHECK_THROWS_AS(sim_bce_loss(none, no_labels), ContractError);
}

TEST_CASE("similarity BCE gradient is sigmoid minus label") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const double s = rng.normal() * 3.0;
    const int y = rng.uniform() < 0.5 ? 1 : 0;
    const double h = 1e-6;
    const double numeric = (sim_bce_term(s + h, y) - sim_bce_term(s - h, y)) / (2.0 * h);
    CHECK(sim_bce_grad(s, y) == doctest::Approx(numeric).epsilon(1e-5));
  }
}

TEST_CASE("total loss is linear in the balancing weight") {
  CHECK(total_loss(0.7, 0.2, 0.0) == doctest::Approx(0.2));
  CHECK(total_loss(0.5, 0.25, 1.0) == doctest::Approx(0.75));
  const double l_bce = 0.37, l_seg = 0.81;
  const double at0 = total_loss(l_bce, l_seg, 0.0);
  const double at_half = total_loss(l_bce, l_seg, 0.5);
  const double at1 = total_loss(l_bce, l_seg, 1.0);
  CHECK(at_half == doctest::Approx((at0 + at1) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(total_loss(0.5, 0.5, -0.1), ContractError);
}

TEST_CASE("stable sigmoid saturates without overflow") {
  CHECK(sigmoid_stable(0.0) == doctest::Approx(0.5));
  CHECK(sigmoid_stable(800.0) == doctest::Approx(1.0));
  CHECK(sigmoid_stable(-800.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(sigmoid_stable(1e9)));
  CHECK(std::isfinite(sigmoid_stable(-1e9)));
}

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
#include <functional>

#include "avsr/checkpoint.hpp"
#include "avsr/losses.hpp"
#include "avsr/network.hpp"
#include "avsr/rng.hpp"

#include "../support/fd_check.hpp"

using namespace avsr;

namespace {

FeatureMap random_frame(int size, std::uint64_t seed, double scale = 1.0) {
  FeatureMap f;
  f.resize(3, size, size);
  Rng rng(seed);
  for (auto& v : f.v) v = rng.uniform() * scale;
  return f;
}

Spectrogram random_audio(std::uint64_t seed, double scale = 1.0) {
  Spectrogram s(8, 16);
  Rng rng(seed);
  for (auto& v : s.values) v = rng.uniform() * scale;
  return s;
}

Mask random_mask(int size, std::uint64_t seed) {
  Mask m(size, size);
  Rng rng(seed);
  for (auto& b : m.bits) b = rng.uniform() < 0.3 ? 1 : 0;
  return m;
}

ModelConfig small_config(SimilarityHeadKind head = SimilarityHeadKind::cosine) {
  ModelConfig cfg;
  cfg.image_size = 32;
  cfg.head = head;
  return cfg;
}

void check_param_grads(Network& net, const std::vector<double>& analytic,
                       const std::function<double()>& fn, int samples_per_group) {
  const avsr_tests::FdStats stats =
      avsr_tests::fd_check_params(net, analytic, fn, samples_per_group, 1234);
  INFO(stats.first_failure);
  CHECK(stats.failures == 0);
  CHECK(stats.strict_checked > stats.kink_probes);
}

}  // namespace

TEST_CASE("visual encoder produces the documented pyramid shapes") {
  Network net(ModelConfig{}, 1);
  const MultiScaleFeatures feats = net.encode_visual(random_frame(64, 2));
  const int expect[4][3] = {{8, 16, 16}, {16, 8, 8}, {32, 4, 4}, {64, 2, 2}};
  for (int i = 0; i < 4; ++i) {
    CHECK(feats.levels[i].c == expect[i][0]);
    CHECK(feats.levels[i].h == expect[i][1]);
    CHECK(feats.levels[i].w == expect[i][2]);
  }
}

TEST_CASE("encoder rejects frames not divisible by 32") {
  Network net(ModelConfig{}, 1);
  FeatureMap f;
  f.resize(3, 48, 48);
  CHECK_THROWS_AS(net.encode_visual(f), ContractError);
}

TEST_CASE("all-zero frame yields all-zero features under zero biases") {
  Network net(ModelConfig{}, 3);  // biases are zero-initialized
  FeatureMap zero;
  zero.resize(3, 64, 64);
  const MultiScaleFeatures feats = net.encode_visual(zero);
  for (const auto& level : feats.levels)
    for (double v : level.v) CHECK(v == 0.0);
}

TEST_CASE("encoding is deterministic") {
  Network net(ModelConfig{}, 4);
  const FeatureMap f = random_frame(64, 5);
  const MultiScaleFeatures a = net.encode_visual(f);
  const MultiScaleFeatures b = net.encode_visual(f);
  for (int i = 0; i < 4; ++i) CHECK(a.levels[i].v == b.levels[i].v);
}

TEST_CASE("audio encoder maps silence to the zero vector under zero biases") {
  Network net(ModelConfig{}, 5);
  const auto fa = net.encode_audio(Spectrogram(8, 16));
  CHECK(fa.size() == 32);
  for (double v : fa) CHECK(v == 0.0);
  const auto fb = net.encode_audio(random_audio(6));
  CHECK(fb == net.encode_audio(random_audio(6)));
  CHECK_THROWS_AS(net.encode_audio(Spectrogram(4, 16)), ContractError);
}

TEST_CASE("alignment pools a constant map to its constant") {
  Network net(ModelConfig{}, 6);
  MultiScaleFeatures feats;
  feats.levels[0].resize(8, 16, 16);
  feats.levels[1].resize(16, 8, 8);
  feats.levels[2].resize(32, 4, 4);
  feats.levels[3].resize(64, 2, 2);
  for (int c = 0; c < 64; ++c)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) feats.levels[3].at(c, y, x) = 0.5 + 0.25 * c;
  const auto pair = net.align(std::vector<real>(32, 0.0), feats);
  CHECK(pair.audio_proj.size() == 64);
  CHECK(pair.visual_pooled.size() == 64);
  for (int c = 0; c < 64; ++c)
    CHECK(pair.visual_pooled[static_cast<std::size_t>(c)] == doctest::Approx(0.5 + 0.25 * c));
  // zero audio through a zero-bias projection stays zero
  for (double v : pair.audio_proj) CHECK(v == 0.0);
}

TEST_CASE("similarity heads implement their geometric definitions") {
  Network cos_net(small_config(SimilarityHeadKind::cosine), 7);
  AlignedPair pair;
  pair.audio_proj = {1.0, 2.0, 0.0, -1.0};
  pair.visual_pooled = {1.0, 2.0, 0.0, -1.0};
  // identical vectors
  pair.audio_proj.resize(64, 0.5);
  pair.visual_pooled.resize(64, 0.5);
  CHECK(cos_net.similarity(pair) == doctest::Approx(1.0));

  // orthogonal vectors
  AlignedPair ortho;
  ortho.audio_proj.assign(64, 0.0);
  ortho.visual_pooled.assign(64, 0.0);
  ortho.audio_proj[0] = 1.0;
  ortho.visual_pooled[1] = 1.0;
  CHECK(cos_net.similarity(ortho) == doctest::Approx(0.0));

  // zero vector: defined as 0
  AlignedPair zero;
  zero.audio_proj.assign(64, 0.0);
  zero.visual_pooled.assign(64, 1.0);
  CHECK(cos_net.similarity(zero) == 0.0);

  // scale invariance for positive scalings
  AlignedPair scaled;
  Rng rng(8);
  scaled.audio_proj.resize(64);
  scaled.visual_pooled.resize(64);
  for (int i = 0; i < 64; ++i) {
    scaled.audio_proj[static_cast<std::size_t>(i)] = rng.normal();
    scaled.visual_pooled[static_cast<std::size_t>(i)] = rng.normal();
  }
  const double base = cos_net.similarity(scaled);
  for (double alpha : {0.01, 0.5, 3.0, 250.0}) {
    AlignedPair s2 = scaled;
    for (auto& v : s2.audio_proj) v *= alpha;
    CHECK(cos_net.similarity(s2) == doctest::Approx(base).epsilon(1e-12));
  }

  Network euc_net(small_config(SimilarityHeadKind::euclidean), 9);
  AlignedPair equal;
  equal.audio_proj.assign(64, 0.75);
  equal.visual_pooled.assign(64, 0.75);
  CHECK(euc_net.similarity(equal) == doctest::Approx(0.0));
  AlignedPair apart = equal;
  apart.audio_proj[0] += 3.0;
  CHECK(euc_net.similarity(apart) == doctest::Approx(-3.0));
}

TEST_CASE("fusion preserves shapes and reduces to the conv output for zero modulation") {
  Network net(ModelConfig{}, 10);
  const MultiScaleFeatures feats = net.encode_visual(random_frame(64, 11));
  // zero audio feature -> film logits are the (zero) biases -> gain 1
  const MultiScaleFeatures fused = net.fuse(feats, std::vector<real>(32, 0.0));
  for (int i = 0; i < 4; ++i) {
    CHECK(fused.levels[i].c == feats.levels[i].c);
    CHECK(fused.levels[i].h == feats.levels[i].h);
    CHECK(fused.levels[i].w == feats.levels[i].w);
  }

  // Different audio features must modulate the maps differently.
  std::vector<real> a1(32), a2(32);
  Rng rng(12);
  for (auto& v : a1) v = rng.normal();
  for (auto& v : a2) v = rng.normal();
  const MultiScaleFeatures f1 = net.fuse(feats, a1);
  const MultiScaleFeatures f2 = net.fuse(feats, a2);
  double max_diff = 0.0;
  for (int i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < f1.levels[i].v.size(); ++k)
      max_diff = std::max(max_diff, std::abs(f1.levels[i].v[k] - f2.levels[i].v[k]));
  CHECK(max_diff > 0.0);
}

TEST_CASE("decoder emits a full-resolution probability map") {
  Network net(ModelConfig{}, 13);
  const FeatureMap frame = random_frame(64, 14);
  const auto out = net.forward(frame, random_audio(15));
  CHECK(out.prob.height == 64);
  CHECK(out.prob.width == 64);
  for (double p : out.prob.probs) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }

  // All-zero fused maps decode to a uniform 0.5 map under zero biases.
  MultiScaleFeatures zeros;
  zeros.levels[0].resize(8, 16, 16);
  zeros.levels[1].resize(16, 8, 8);
  zeros.levels[2].resize(32, 4, 4);
  zeros.levels[3].resize(64, 2, 2);
  const ProbMask p = net.decode(zeros);
  for (double v : p.probs) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("forward composes the staged operations exactly") {
  Network net(ModelConfig{}, 16);
  const FeatureMap frame = random_frame(64, 17);
  const Spectrogram audio = random_audio(18);

  const auto out = net.forward(frame, audio);
  const MultiScaleFeatures feats = net.encode_visual(frame);
  const auto fa = net.encode_audio(audio);
  const auto pair = net.align(fa, feats);
  const double score = net.similarity(pair);
  const ProbMask prob = net.decode(net.fuse(feats, fa));

  CHECK(out.score == doctest::Approx(score).epsilon(1e-12));
  REQUIRE(out.prob.probs.size() == prob.probs.size());
  for (std::size_t i = 0; i < prob.probs.size(); ++i)
    CHECK(out.prob.probs[i] == doctest::Approx(prob.probs[i]).epsilon(1e-12));
}

TEST_CASE("outputs stay finite for extreme inputs") {
  for (auto head : {SimilarityHeadKind::cosine, SimilarityHeadKind::euclidean,
                    SimilarityHeadKind::concat}) {
    ModelConfig cfg;
    cfg.head = head;
    Network net(cfg, 19);
    const auto out_hi = net.forward(random_frame(64, 20, 1e3), random_audio(21, 1e3));
    CHECK(std::isfinite(out_hi.score));
    for (double p : out_hi.prob.probs) {
      CHECK(std::isfinite(p));
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("parameter budget stays under 200k for every head") {
  for (auto head : {SimilarityHeadKind::cosine, SimilarityHeadKind::euclidean,
                    SimilarityHeadKind::concat}) {
    ModelConfig cfg;
    cfg.head = head;
    const Network net(cfg, 22);
    CHECK(net.param_count() <= 200000);
  }
}

TEST_CASE("similarity score gradients match finite differences") {
  for (auto head : {SimilarityHeadKind::cosine, SimilarityHeadKind::euclidean,
                    SimilarityHeadKind::concat}) {
    CAPTURE(to_string(head));
    Network net(small_config(head), 23);
    avsr_tests::perturb_params(net, 230);
    const FeatureMap frame = random_frame(32, 24);
    const Spectrogram audio = random_audio(25);

    Network::Workspace ws;
    net.forward(ws, frame, audio, false, 0);
    std::vector<double> analytic(net.param_count(), 0.0);
    const std::vector<double> no_dlogit(static_cast<std::size_t>(32 * 32), 0.0);
    net.backward(ws, no_dlogit, 1.0, analytic);

    Network::Workspace fd_ws;
    const auto score_fn = [&]() {
      net.forward(fd_ws, frame, audio, false, 0);
      return fd_ws.score;
    };
    check_param_grads(net, analytic, score_fn, 4);
  }
}

TEST_CASE("segmentation loss gradients match finite differences") {
  Network net(small_config(), 26);
  avsr_tests::perturb_params(net, 260);
  const FeatureMap frame = random_frame(32, 27);
  const Spectrogram audio = random_audio(28);
  const Mask gt = random_mask(32, 29);

  Network::Workspace ws;
  net.forward(ws, frame, audio, false, 0);
  std::vector<double> dlogit;
  seg_loss_grad_wrt_logit(ws.prob, gt, 1.0, dlogit);
  std::vector<double> analytic(net.param_count(), 0.0);
  net.backward(ws, dlogit, 0.0, analytic);

  Network::Workspace fd_ws;
  const auto loss_fn = [&]() {
    net.forward(fd_ws, frame, audio, false, 0);
    return seg_loss(fd_ws.prob, gt);
  };
  check_param_grads(net, analytic, loss_fn, 4);
}

TEST_CASE("checkpoints round-trip parameters exactly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "avsr_tests" / "ckpt";
  fs::create_directories(dir);

  ModelConfig cfg;
  Network net(cfg, 30);
  RunConfig run;
  run.seed = 30;
  AdamState adam;
  adam.step = 17;
  adam.m.assign(net.param_count(), 0.125);
  adam.v.assign(net.param_count(), 0.5);

  const std::string path = (dir / "net.avsc").string();
  save_checkpoint(path, net, run, 30, 4, 0.75, &adam);

  const LoadedCheckpoint ckpt = load_checkpoint(path);
  CHECK(ckpt.epoch == 4);
  CHECK(ckpt.seed == 30);
  CHECK(ckpt.best_val_gmiou == doctest::Approx(0.75));
  CHECK(ckpt.run_config == run);
  CHECK(ckpt.model_config == cfg);
  REQUIRE(ckpt.adam.has_value());
  CHECK(ckpt.adam->step == 17);
  CHECK(ckpt.adam->m[0] == 0.125);

  // float64 section restores parameters bit-exactly
  const Network back = network_from_checkpoint(ckpt);
  CHECK(back.params().values() == net.params().values());

  // identical saves are byte-identical
  const std::string path2 = (dir / "net2.avsc").string();
  save_checkpoint(path2, net, run, 30, 4, 0.75, &adam);
  CHECK(checkpoint_digest(path) == checkpoint_digest(path2));
}

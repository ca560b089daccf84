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

#ifndef AVSR_NETWORK_HPP
#define AVSR_NETWORK_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "avsr/config.hpp"
#include "avsr/mask.hpp"
#include "avsr/spectrogram.hpp"

namespace avsr {

using real = double;

// Dense CHW feature map.
struct FeatureMap {
  int c = 0, h = 0, w = 0;
  std::vector<real> v;

  void resize(int c_, int h_, int w_) {
    c = c_;
    h = h_;
    w = w_;
    v.assign(static_cast<std::size_t>(c_) * h_ * w_, 0.0);
  }
  real& at(int ci, int y, int x) {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  real at(int ci, int y, int x) const {
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const FeatureMap& o) const { return c == o.c && h == o.h && w == o.w; }
};

// Visual pyramid: level i has spatial size (H, W) / 2^(i+2) and channels
// strictly increasing across levels.
struct MultiScaleFeatures {
  std::array<FeatureMap, 4> levels;
};

struct AlignedPair {
  std::vector<real> audio_proj;     // projected audio feature, dim C4
  std::vector<real> visual_pooled;  // mean-pooled deepest visual map, dim C4
};

struct ModelConfig {
  int image_size = 64;
  int spec_frames = 8;
  int spec_bins = 16;
  int audio_dim = 32;
  int audio_hidden = 64;
  std::array<int, 4> channels = {8, 16, 32, 64};
  int decoder_width = 32;
  SimilarityHeadKind head = SimilarityHeadKind::cosine;
  double dropout = 0.1;  // concat head only

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::ordered_json& j);
  static ModelConfig for_run(const RunConfig& run, int image_size = 64, int spec_frames = 8,
                             int spec_bins = 16);
  bool operator==(const ModelConfig&) const = default;
};

// Flat parameter arena. Layers address slices by offset; the value vector is
// the exact payload of a checkpoint's parameter section, in entry order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t count = 0;
  };

  std::size_t add(const std::string& name, std::vector<int> shape);
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<real>& values() { return values_; }
  const std::vector<real>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Entry& by_name(const std::string& name) const;

 private:
  std::vector<Entry> entries_;
  std::vector<real> values_;
};

struct ConvLayer {
  int in_c = 0, out_c = 0, k = 1, stride = 1, pad = 0, dil = 1;
  std::size_t w = 0, b = 0;  // offsets into the ParamStore
};

struct LinearLayer {
  int in = 0, out = 0;
  std::size_t w = 0, b = 0;
};

// Dual-stream segmentation model: strided conv pyramid over the frame, MLP
// over the spectrogram, multi-dilation fusion blocks modulated per channel by
// the audio feature, a top-down decoder to a full-resolution mask, and an
// audio-visual similarity head supervised contrastively during training.
class Network {
 public:
  Network(const ModelConfig& cfg, std::uint64_t init_seed);

  // Every intermediate activation of one sample, plus matching gradient
  // buffers. Reused across samples to avoid reallocation.
  struct Workspace {
    FeatureMap input;
    std::array<FeatureMap, 4> enc_z, enc_a;
    FeatureMap enc_r_z, enc_r_a;  // stage-1 refining conv
    std::vector<real> audio_in, audio_h1z, audio_h1, audio_feat;
    std::vector<real> align_audio, align_visual;
    real score = 0.0;
    // concat head internals
    std::vector<real> cat_in, cat_h1z, cat_h1, cat_h1d, cat_h2z, cat_h2, cat_h2d;
    std::vector<real> drop1, drop2;
    // fusion internals
    std::array<FeatureMap, 4> red_z, red_a;
    std::array<std::array<FeatureMap, 3>, 4> dil_out;
    std::array<FeatureMap, 4> dsum_z, dsum_a, conv_out, fused;
    std::array<std::vector<real>, 4> film_z, film_g;
    // decoder internals
    std::array<FeatureMap, 4> lat, pyr;
    FeatureMap pyr_relu, logit_low;
    std::vector<real> logit_full;
    ProbMask prob;
    bool train_mode = false;

    // gradient mirrors
    std::array<FeatureMap, 4> g_enc_a;
    FeatureMap g_enc_r_a;
    std::vector<real> g_audio_feat, g_audio_h1, g_align_audio, g_align_visual;
    std::vector<real> g_cat_in, g_cat_h1d, g_cat_h2d, g_cat_h1, g_cat_h2;
    std::array<FeatureMap, 4> g_red_a, g_dsum_a, g_conv_out, g_fused;
    FeatureMap g_scratch_a, g_scratch_b;
    std::array<FeatureMap, 4> g_lat, g_pyr;
    FeatureMap g_pyr_relu, g_logit_low;
  };

  // --- inference-mode views of the individual stages ---
  MultiScaleFeatures encode_visual(const FeatureMap& frame) const;
  std::vector<real> encode_audio(const Spectrogram& spec) const;
  AlignedPair align(const std::vector<real>& audio_feat, const MultiScaleFeatures& feats) const;
  real similarity(const AlignedPair& pair) const;
  MultiScaleFeatures fuse(const MultiScaleFeatures& feats,
                          const std::vector<real>& audio_feat) const;
  ProbMask decode(const MultiScaleFeatures& fused) const;

  struct ForwardOutput {
    ProbMask prob;
    real score = 0.0;
  };
  ForwardOutput forward(const FeatureMap& frame, const Spectrogram& spec) const;

  // --- training interface ---
  void forward(Workspace& ws, const FeatureMap& frame, const Spectrogram& spec, bool train_mode,
               std::uint64_t dropout_seed) const;
  // dlogit is dL/d(full-resolution logits); dscore is dL/d(similarity score).
  // Parameter gradients accumulate into grad (caller zeroes it).
  void backward(Workspace& ws, const std::vector<real>& dlogit, real dscore,
                std::vector<real>& grad) const;

  std::size_t param_count() const { return store_.size(); }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const ModelConfig& config() const { return cfg_; }

 private:
  void check_frame(const FeatureMap& frame) const;
  void check_audio(const Spectrogram& spec) const;
  void forward_stages(Workspace& ws, std::uint64_t dropout_seed) const;

  ModelConfig cfg_;
  ParamStore store_;

  std::array<ConvLayer, 4> enc_;
  ConvLayer enc_refine_;  // stride-1 conv refining the shallowest level
  LinearLayer audio_fc1_, audio_fc2_, align_proj_;
  std::array<ConvLayer, 4> fuse_reduce_, fuse_expand_;
  std::array<std::array<ConvLayer, 3>, 4> fuse_dil_;
  std::array<LinearLayer, 4> film_;
  std::array<ConvLayer, 4> lat_;
  ConvLayer dec_head_;
  LinearLayer cat_fc1_, cat_fc2_, cat_fc3_;  // concat head only
};

real sigmoid_stable(real z);

}  // namespace avsr

#endif  // AVSR_NETWORK_HPP

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

#include "avsr/network.hpp"

#include <cmath>

#include "avsr/errors.hpp"
#include "avsr/rng.hpp"

namespace avsr {

namespace {

constexpr real kNormFloor = 1e-12;  // below this a vector counts as zero

int conv_out_dim(int in, const ConvLayer& L) {
  const int eff_k = L.dil * (L.k - 1) + 1;
  return (in + 2 * L.pad - eff_k) / L.stride + 1;
}

void conv_forward(const ConvLayer& L, const real* P, const FeatureMap& x, FeatureMap& y) {
  const int oh = conv_out_dim(x.h, L);
  const int ow = conv_out_dim(x.w, L);
  y.resize(L.out_c, oh, ow);
  for (int oc = 0; oc < L.out_c; ++oc) {
    const real* wbase = P + L.w + static_cast<std::size_t>(oc) * L.in_c * L.k * L.k;
    const real bias = P[L.b + oc];
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        real acc = bias;
        for (int ic = 0; ic < L.in_c; ++ic) {
          const real* wk = wbase + static_cast<std::size_t>(ic) * L.k * L.k;
          for (int ky = 0; ky < L.k; ++ky) {
            const int iy = oy * L.stride - L.pad + ky * L.dil;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < L.k; ++kx) {
              const int ix = ox * L.stride - L.pad + kx * L.dil;
              if (ix < 0 || ix >= x.w) continue;
              acc += wk[ky * L.k + kx] * x.at(ic, iy, ix);
            }
          }
        }
        y.at(oc, oy, ox) = acc;
      }
    }
  }
}

// gx, when non-null, must be pre-sized to x's shape; gradients accumulate.
void conv_backward(const ConvLayer& L, const real* P, const FeatureMap& x, const FeatureMap& gy,
                   FeatureMap* gx, real* G) {
  for (int oc = 0; oc < L.out_c; ++oc) {
    const real* wbase = P + L.w + static_cast<std::size_t>(oc) * L.in_c * L.k * L.k;
    real* gwbase = G + L.w + static_cast<std::size_t>(oc) * L.in_c * L.k * L.k;
    real gbias = 0.0;
    for (int oy = 0; oy < gy.h; ++oy) {
      for (int ox = 0; ox < gy.w; ++ox) {
        const real g = gy.at(oc, oy, ox);
        if (g == 0.0) continue;
        gbias += g;
        for (int ic = 0; ic < L.in_c; ++ic) {
          const real* wk = wbase + static_cast<std::size_t>(ic) * L.k * L.k;
          real* gwk = gwbase + static_cast<std::size_t>(ic) * L.k * L.k;
          for (int ky = 0; ky < L.k; ++ky) {
            const int iy = oy * L.stride - L.pad + ky * L.dil;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < L.k; ++kx) {
              const int ix = ox * L.stride - L.pad + kx * L.dil;
              if (ix < 0 || ix >= x.w) continue;
              gwk[ky * L.k + kx] += g * x.at(ic, iy, ix);
              if (gx) gx->at(ic, iy, ix) += g * wk[ky * L.k + kx];
            }
          }
        }
      }
    }
    G[L.b + oc] += gbias;
  }
}

void linear_forward(const LinearLayer& L, const real* P, const real* x, real* y) {
  for (int o = 0; o < L.out; ++o) {
    const real* w = P + L.w + static_cast<std::size_t>(o) * L.in;
    real acc = P[L.b + o];
    for (int i = 0; i < L.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

void linear_backward(const LinearLayer& L, const real* P, const real* x, const real* gy,
                     real* gx, real* G) {
  for (int o = 0; o < L.out; ++o) {
    const real g = gy[o];
    G[L.b + o] += g;
    const real* w = P + L.w + static_cast<std::size_t>(o) * L.in;
    real* gw = G + L.w + static_cast<std::size_t>(o) * L.in;
    for (int i = 0; i < L.in; ++i) {
      gw[i] += g * x[i];
      if (gx) gx[i] += g * w[i];
    }
  }
}

void relu(const FeatureMap& z, FeatureMap& a) {
  a.resize(z.c, z.h, z.w);
  for (std::size_t i = 0; i < z.v.size(); ++i) a.v[i] = z.v[i] > 0.0 ? z.v[i] : 0.0;
}

void relu_vec(const std::vector<real>& z, std::vector<real>& a) {
  a.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

// Nearest-neighbor 2x upsample used by the top-down pathway.
void upsample2_add(const FeatureMap& x, FeatureMap& y) {
  for (int c = 0; c < x.c; ++c)
    for (int iy = 0; iy < x.h; ++iy)
      for (int ix = 0; ix < x.w; ++ix) {
        const real v = x.at(c, iy, ix);
        y.at(c, 2 * iy, 2 * ix) += v;
        y.at(c, 2 * iy, 2 * ix + 1) += v;
        y.at(c, 2 * iy + 1, 2 * ix) += v;
        y.at(c, 2 * iy + 1, 2 * ix + 1) += v;
      }
}

void upsample2_adjoint_add(const FeatureMap& gy, FeatureMap& gx) {
  for (int c = 0; c < gx.c; ++c)
    for (int iy = 0; iy < gx.h; ++iy)
      for (int ix = 0; ix < gx.w; ++ix)
        gx.at(c, iy, ix) += gy.at(c, 2 * iy, 2 * ix) + gy.at(c, 2 * iy, 2 * ix + 1) +
                            gy.at(c, 2 * iy + 1, 2 * ix) + gy.at(c, 2 * iy + 1, 2 * ix + 1);
}

struct LerpTap {
  int i0 = 0, i1 = 0;
  real w0 = 1.0, w1 = 0.0;
};

LerpTap lerp_tap(int out_idx, int scale, int in_dim) {
  const double src = (out_idx + 0.5) / scale - 0.5;
  double f = std::floor(src);
  LerpTap t;
  t.w1 = src - f;
  t.w0 = 1.0 - t.w1;
  int i0 = static_cast<int>(f);
  int i1 = i0 + 1;
  if (i0 < 0) i0 = 0;
  if (i1 < 0) i1 = 0;
  if (i0 > in_dim - 1) i0 = in_dim - 1;
  if (i1 > in_dim - 1) i1 = in_dim - 1;
  t.i0 = i0;
  t.i1 = i1;
  return t;
}

// Bilinear 4x upsample of the single-channel logit map to frame resolution.
void bilinear4(const FeatureMap& x, std::vector<real>& y, int oh, int ow) {
  y.assign(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int oy = 0; oy < oh; ++oy) {
    const LerpTap ty = lerp_tap(oy, 4, x.h);
    for (int ox = 0; ox < ow; ++ox) {
      const LerpTap tx = lerp_tap(ox, 4, x.w);
      y[static_cast<std::size_t>(oy) * ow + ox] =
          ty.w0 * (tx.w0 * x.at(0, ty.i0, tx.i0) + tx.w1 * x.at(0, ty.i0, tx.i1)) +
          ty.w1 * (tx.w0 * x.at(0, ty.i1, tx.i0) + tx.w1 * x.at(0, ty.i1, tx.i1));
    }
  }
}

void bilinear4_adjoint(const std::vector<real>& gy, int oh, int ow, FeatureMap& gx) {
  for (int oy = 0; oy < oh; ++oy) {
    const LerpTap ty = lerp_tap(oy, 4, gx.h);
    for (int ox = 0; ox < ow; ++ox) {
      const LerpTap tx = lerp_tap(ox, 4, gx.w);
      const real g = gy[static_cast<std::size_t>(oy) * ow + ox];
      if (g == 0.0) continue;
      gx.at(0, ty.i0, tx.i0) += g * ty.w0 * tx.w0;
      gx.at(0, ty.i0, tx.i1) += g * ty.w0 * tx.w1;
      gx.at(0, ty.i1, tx.i0) += g * ty.w1 * tx.w0;
      gx.at(0, ty.i1, tx.i1) += g * ty.w1 * tx.w1;
    }
  }
}

real dot(const std::vector<real>& a, const std::vector<real>& b) {
  real s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

real norm2(const std::vector<real>& a) { return std::sqrt(dot(a, a)); }

void fill_dropout_mask(std::vector<real>& mask, std::size_t n, double p, Rng& rng) {
  mask.resize(n);
  const real keep_scale = 1.0 / (1.0 - p);
  for (auto& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
}

}  // namespace

real sigmoid_stable(real z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const real e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t ParamStore::add(const std::string& name, std::vector<int> shape) {
  Entry e;
  e.name = name;
  e.shape = std::move(shape);
  e.count = 1;
  for (int d : e.shape) e.count *= static_cast<std::size_t>(d);
  e.offset = values_.size();
  values_.resize(values_.size() + e.count, 0.0);
  entries_.push_back(e);
  return entries_.back().offset;
}

const ParamStore::Entry& ParamStore::by_name(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw ContractError("unknown parameter group: " + name);
}

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["image_size"] = image_size;
  j["spec_frames"] = spec_frames;
  j["spec_bins"] = spec_bins;
  j["audio_dim"] = audio_dim;
  j["audio_hidden"] = audio_hidden;
  j["channels"] = channels;
  j["decoder_width"] = decoder_width;
  j["head"] = to_string(head);
  j["dropout"] = dropout;
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::ordered_json& j) {
  ModelConfig m;
  m.image_size = j.at("image_size").get<int>();
  m.spec_frames = j.at("spec_frames").get<int>();
  m.spec_bins = j.at("spec_bins").get<int>();
  m.audio_dim = j.at("audio_dim").get<int>();
  m.audio_hidden = j.at("audio_hidden").get<int>();
  const auto ch = j.at("channels").get<std::vector<int>>();
  for (int i = 0; i < 4; ++i) m.channels[i] = ch.at(i);
  m.decoder_width = j.at("decoder_width").get<int>();
  m.head = head_kind_from_string(j.at("head").get<std::string>());
  m.dropout = j.at("dropout").get<double>();
  return m;
}

ModelConfig ModelConfig::for_run(const RunConfig& run, int image_size, int spec_frames,
                                 int spec_bins) {
  ModelConfig m;
  m.image_size = image_size;
  m.spec_frames = spec_frames;
  m.spec_bins = spec_bins;
  m.audio_dim = run.audio_dim;
  m.head = run.similarity_head;
  return m;
}

Network::Network(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  if (cfg.image_size % 32 != 0 || cfg.image_size < 32)
    throw ContractError("image_size must be a positive multiple of 32");

  auto conv = [&](const std::string& name, int in_c, int out_c, int k, int stride, int pad,
                  int dil) {
    ConvLayer L;
    L.in_c = in_c;
    L.out_c = out_c;
    L.k = k;
    L.stride = stride;
    L.pad = pad;
    L.dil = dil;
    L.w = store_.add(name + ".w", {out_c, in_c, k, k});
    L.b = store_.add(name + ".b", {out_c});
    return L;
  };
  auto linear = [&](const std::string& name, int in, int out) {
    LinearLayer L;
    L.in = in;
    L.out = out;
    L.w = store_.add(name + ".w", {out, in});
    L.b = store_.add(name + ".b", {out});
    return L;
  };

  const auto& C = cfg_.channels;
  enc_[0] = conv("enc.conv1", 3, C[0], 5, 4, 2, 1);
  enc_refine_ = conv("enc.conv1b", C[0], C[0], 3, 1, 1, 1);
  enc_[1] = conv("enc.conv2", C[0], C[1], 3, 2, 1, 1);
  enc_[2] = conv("enc.conv3", C[1], C[2], 3, 2, 1, 1);
  enc_[3] = conv("enc.conv4", C[2], C[3], 3, 2, 1, 1);

  const int flat = cfg_.spec_frames * cfg_.spec_bins;
  audio_fc1_ = linear("audio.fc1", flat, cfg_.audio_hidden);
  audio_fc2_ = linear("audio.fc2", cfg_.audio_hidden, cfg_.audio_dim);
  align_proj_ = linear("align.proj", cfg_.audio_dim, C[3]);

  // Gates read the aligned audio projection (shared with the similarity
  // head), so contrastive guidance directly organizes the signal the fusion
  // modulates with.
  for (int i = 0; i < 4; ++i) {
    const std::string base = "fuse" + std::to_string(i + 1);
    const int R = C[i] / 2;
    fuse_reduce_[i] = conv(base + ".reduce", C[i], R, 1, 1, 0, 1);
    for (int j = 0; j < 3; ++j)
      fuse_dil_[i][j] = conv(base + ".dil" + std::to_string(j + 1), R, R, 3, 1, j + 1, j + 1);
    fuse_expand_[i] = conv(base + ".expand", R, C[i], 1, 1, 0, 1);
    film_[i] = linear(base + ".film", C[3], C[i]);
  }

  for (int i = 0; i < 4; ++i)
    lat_[i] = conv("dec.lat" + std::to_string(i + 1), C[i], cfg_.decoder_width, 1, 1, 0, 1);
  dec_head_ = conv("dec.head", cfg_.decoder_width, 1, 3, 1, 1, 1);

  if (cfg_.head == SimilarityHeadKind::concat) {
    cat_fc1_ = linear("simhead.fc1", 2 * C[3], C[3]);
    cat_fc2_ = linear("simhead.fc2", C[3], C[3] / 2);
    cat_fc3_ = linear("simhead.fc3", C[3] / 2, 1);
  }

  // Uniform fan-in init for weights, zero biases, in registration order.
  Rng rng(init_seed);
  auto& vals = store_.values();
  for (const auto& e : store_.entries()) {
    if (e.name.size() >= 2 && e.name.compare(e.name.size() - 2, 2, ".b") == 0) continue;
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < e.shape.size(); ++d) fan_in *= static_cast<std::size_t>(e.shape[d]);
    const real a = 1.0 / std::sqrt(static_cast<real>(fan_in));
    for (std::size_t i = 0; i < e.count; ++i) vals[e.offset + i] = rng.uniform(-a, a);
  }
}

void Network::check_frame(const FeatureMap& frame) const {
  if (frame.c != 3) throw ContractError("frame must have 3 channels");
  if (frame.h % 32 != 0 || frame.w % 32 != 0 || frame.h < 32 || frame.w < 32)
    throw ContractError("frame dimensions must be positive multiples of 32");
}

void Network::check_audio(const Spectrogram& spec) const {
  if (spec.frames != cfg_.spec_frames || spec.bins != cfg_.spec_bins)
    throw ContractError("spectrogram dimensions do not match model config");
}

void Network::forward(Workspace& ws, const FeatureMap& frame, const Spectrogram& spec,
                      bool train_mode, std::uint64_t dropout_seed) const {
  check_frame(frame);
  check_audio(spec);
  ws.input = frame;
  ws.audio_in.assign(spec.values.begin(), spec.values.end());
  ws.train_mode = train_mode;
  forward_stages(ws, dropout_seed);
}

void Network::forward_stages(Workspace& ws, std::uint64_t dropout_seed) const {
  const real* P = store_.values().data();
  const auto& C = cfg_.channels;

  // visual pyramid; the shallowest level gets an extra refining conv
  conv_forward(enc_[0], P, ws.input, ws.enc_z[0]);
  relu(ws.enc_z[0], ws.enc_a[0]);
  conv_forward(enc_refine_, P, ws.enc_a[0], ws.enc_r_z);
  relu(ws.enc_r_z, ws.enc_r_a);
  conv_forward(enc_[1], P, ws.enc_r_a, ws.enc_z[1]);
  relu(ws.enc_z[1], ws.enc_a[1]);
  conv_forward(enc_[2], P, ws.enc_a[1], ws.enc_z[2]);
  relu(ws.enc_z[2], ws.enc_a[2]);
  conv_forward(enc_[3], P, ws.enc_a[2], ws.enc_z[3]);
  relu(ws.enc_z[3], ws.enc_a[3]);

  // audio feature
  ws.audio_h1z.resize(audio_fc1_.out);
  linear_forward(audio_fc1_, P, ws.audio_in.data(), ws.audio_h1z.data());
  relu_vec(ws.audio_h1z, ws.audio_h1);
  ws.audio_feat.resize(audio_fc2_.out);
  linear_forward(audio_fc2_, P, ws.audio_h1.data(), ws.audio_feat.data());

  // aligned pair
  ws.align_audio.resize(align_proj_.out);
  linear_forward(align_proj_, P, ws.audio_feat.data(), ws.align_audio.data());
  const FeatureMap& top = ws.enc_a[3];
  ws.align_visual.assign(C[3], 0.0);
  const real inv_hw = 1.0 / (static_cast<real>(top.h) * top.w);
  for (int c = 0; c < top.c; ++c) {
    real s = 0.0;
    for (int y = 0; y < top.h; ++y)
      for (int xx = 0; xx < top.w; ++xx) s += top.at(c, y, xx);
    ws.align_visual[c] = s * inv_hw;
  }

  // similarity score
  switch (cfg_.head) {
    case SimilarityHeadKind::cosine: {
      const real na = norm2(ws.align_audio);
      const real nv = norm2(ws.align_visual);
      ws.score = (na < kNormFloor || nv < kNormFloor)
                     ? 0.0
                     : dot(ws.align_audio, ws.align_visual) / (na * nv);
      break;
    }
    case SimilarityHeadKind::euclidean: {
      real d2 = 0.0;
      for (std::size_t i = 0; i < ws.align_audio.size(); ++i) {
        const real d = ws.align_audio[i] - ws.align_visual[i];
        d2 += d * d;
      }
      ws.score = -std::sqrt(d2);
      break;
    }
    case SimilarityHeadKind::concat: {
      ws.cat_in.resize(2 * C[3]);
      std::copy(ws.align_audio.begin(), ws.align_audio.end(), ws.cat_in.begin());
      std::copy(ws.align_visual.begin(), ws.align_visual.end(), ws.cat_in.begin() + C[3]);
      ws.cat_h1z.resize(cat_fc1_.out);
      linear_forward(cat_fc1_, P, ws.cat_in.data(), ws.cat_h1z.data());
      relu_vec(ws.cat_h1z, ws.cat_h1);
      if (ws.train_mode) {
        Rng drop_rng(child_seed(dropout_seed, "drop1"));
        fill_dropout_mask(ws.drop1, ws.cat_h1.size(), cfg_.dropout, drop_rng);
      } else {
        ws.drop1.assign(ws.cat_h1.size(), 1.0);
      }
      ws.cat_h1d.resize(ws.cat_h1.size());
      for (std::size_t i = 0; i < ws.cat_h1.size(); ++i)
        ws.cat_h1d[i] = ws.cat_h1[i] * ws.drop1[i];
      ws.cat_h2z.resize(cat_fc2_.out);
      linear_forward(cat_fc2_, P, ws.cat_h1d.data(), ws.cat_h2z.data());
      relu_vec(ws.cat_h2z, ws.cat_h2);
      if (ws.train_mode) {
        Rng drop_rng(child_seed(dropout_seed, "drop2"));
        fill_dropout_mask(ws.drop2, ws.cat_h2.size(), cfg_.dropout, drop_rng);
      } else {
        ws.drop2.assign(ws.cat_h2.size(), 1.0);
      }
      ws.cat_h2d.resize(ws.cat_h2.size());
      for (std::size_t i = 0; i < ws.cat_h2.size(); ++i)
        ws.cat_h2d[i] = ws.cat_h2[i] * ws.drop2[i];
      real s1 = 0.0;
      linear_forward(cat_fc3_, P, ws.cat_h2d.data(), &s1);
      ws.score = s1;
      break;
    }
  }

  // fusion: multi-dilation block, then per-channel audio modulation
  for (int i = 0; i < 4; ++i) {
    const FeatureMap& level_in = i == 0 ? ws.enc_r_a : ws.enc_a[i];
    conv_forward(fuse_reduce_[i], P, level_in, ws.red_z[i]);
    relu(ws.red_z[i], ws.red_a[i]);
    for (int j = 0; j < 3; ++j) conv_forward(fuse_dil_[i][j], P, ws.red_a[i], ws.dil_out[i][j]);
    ws.dsum_z[i].resize(ws.dil_out[i][0].c, ws.dil_out[i][0].h, ws.dil_out[i][0].w);
    for (std::size_t n = 0; n < ws.dsum_z[i].v.size(); ++n)
      ws.dsum_z[i].v[n] = ws.dil_out[i][0].v[n] + ws.dil_out[i][1].v[n] + ws.dil_out[i][2].v[n];
    relu(ws.dsum_z[i], ws.dsum_a[i]);
    conv_forward(fuse_expand_[i], P, ws.dsum_a[i], ws.conv_out[i]);

    ws.film_z[i].resize(film_[i].out);
    linear_forward(film_[i], P, ws.align_audio.data(), ws.film_z[i].data());
    ws.film_g[i].resize(ws.film_z[i].size());
    for (std::size_t c = 0; c < ws.film_z[i].size(); ++c)
      ws.film_g[i][c] = 1.0 + std::tanh(ws.film_z[i][c]);

    ws.fused[i].resize(ws.conv_out[i].c, ws.conv_out[i].h, ws.conv_out[i].w);
    for (int c = 0; c < ws.fused[i].c; ++c) {
      const real g = ws.film_g[i][static_cast<std::size_t>(c)];
      for (int y = 0; y < ws.fused[i].h; ++y)
        for (int xx = 0; xx < ws.fused[i].w; ++xx)
          ws.fused[i].at(c, y, xx) = ws.conv_out[i].at(c, y, xx) * g;
    }
  }

  // decoder: top-down merge, 1x1 head, bilinear upsample, sigmoid
  for (int i = 0; i < 4; ++i) conv_forward(lat_[i], P, ws.fused[i], ws.lat[i]);
  ws.pyr[3] = ws.lat[3];
  for (int i = 2; i >= 0; --i) {
    ws.pyr[i] = ws.lat[i];
    upsample2_add(ws.pyr[i + 1], ws.pyr[i]);
  }
  relu(ws.pyr[0], ws.pyr_relu);
  conv_forward(dec_head_, P, ws.pyr_relu, ws.logit_low);

  const int oh = ws.input.h;
  const int ow = ws.input.w;
  bilinear4(ws.logit_low, ws.logit_full, oh, ow);
  ws.prob.height = oh;
  ws.prob.width = ow;
  ws.prob.probs.resize(ws.logit_full.size());
  for (std::size_t i = 0; i < ws.logit_full.size(); ++i)
    ws.prob.probs[i] = sigmoid_stable(ws.logit_full[i]);
}

void Network::backward(Workspace& ws, const std::vector<real>& dlogit, real dscore,
                       std::vector<real>& grad) const {
  const real* P = store_.values().data();
  real* G = grad.data();
  const auto& C = cfg_.channels;

  // zero gradient mirrors
  ws.g_enc_r_a.resize(ws.enc_r_a.c, ws.enc_r_a.h, ws.enc_r_a.w);
  ws.g_enc_r_a.zero();
  for (int i = 0; i < 4; ++i) {
    ws.g_enc_a[i].resize(ws.enc_a[i].c, ws.enc_a[i].h, ws.enc_a[i].w);
    ws.g_enc_a[i].zero();
    ws.g_red_a[i].resize(ws.red_a[i].c, ws.red_a[i].h, ws.red_a[i].w);
    ws.g_red_a[i].zero();
    ws.g_dsum_a[i].resize(ws.dsum_a[i].c, ws.dsum_a[i].h, ws.dsum_a[i].w);
    ws.g_dsum_a[i].zero();
    ws.g_conv_out[i].resize(ws.conv_out[i].c, ws.conv_out[i].h, ws.conv_out[i].w);
    ws.g_conv_out[i].zero();
    ws.g_fused[i].resize(ws.fused[i].c, ws.fused[i].h, ws.fused[i].w);
    ws.g_fused[i].zero();
    ws.g_pyr[i].resize(ws.pyr[i].c, ws.pyr[i].h, ws.pyr[i].w);
    ws.g_pyr[i].zero();
    ws.g_lat[i].resize(ws.lat[i].c, ws.lat[i].h, ws.lat[i].w);
    ws.g_lat[i].zero();
  }
  ws.g_audio_feat.assign(ws.audio_feat.size(), 0.0);
  ws.g_audio_h1.assign(ws.audio_h1.size(), 0.0);
  ws.g_align_audio.assign(ws.align_audio.size(), 0.0);
  ws.g_align_visual.assign(ws.align_visual.size(), 0.0);

  // --- similarity head ---
  if (dscore != 0.0) {
    switch (cfg_.head) {
      case SimilarityHeadKind::cosine: {
        const real na = norm2(ws.align_audio);
        const real nv = norm2(ws.align_visual);
        if (na >= kNormFloor && nv >= kNormFloor) {
          const real s = ws.score;
          const real inv = 1.0 / (na * nv);
          for (std::size_t i = 0; i < ws.align_audio.size(); ++i) {
            ws.g_align_audio[i] +=
                dscore * (ws.align_visual[i] * inv - s * ws.align_audio[i] / (na * na));
            ws.g_align_visual[i] +=
                dscore * (ws.align_audio[i] * inv - s * ws.align_visual[i] / (nv * nv));
          }
        }
        break;
      }
      case SimilarityHeadKind::euclidean: {
        const real dist = -ws.score;
        if (dist >= kNormFloor) {
          for (std::size_t i = 0; i < ws.align_audio.size(); ++i) {
            const real d = (ws.align_audio[i] - ws.align_visual[i]) / dist;
            ws.g_align_audio[i] += dscore * (-d);
            ws.g_align_visual[i] += dscore * d;
          }
        }
        break;
      }
      case SimilarityHeadKind::concat: {
        ws.g_cat_h2d.assign(ws.cat_h2d.size(), 0.0);
        const real gs = dscore;
        linear_backward(cat_fc3_, P, ws.cat_h2d.data(), &gs, ws.g_cat_h2d.data(), G);
        ws.g_cat_h2.assign(ws.cat_h2.size(), 0.0);
        for (std::size_t i = 0; i < ws.cat_h2.size(); ++i) {
          const real gd = ws.g_cat_h2d[i] * ws.drop2[i];
          ws.g_cat_h2[i] = ws.cat_h2z[i] > 0.0 ? gd : 0.0;
        }
        ws.g_cat_h1d.assign(ws.cat_h1d.size(), 0.0);
        linear_backward(cat_fc2_, P, ws.cat_h1d.data(), ws.g_cat_h2.data(), ws.g_cat_h1d.data(),
                        G);
        ws.g_cat_h1.assign(ws.cat_h1.size(), 0.0);
        for (std::size_t i = 0; i < ws.cat_h1.size(); ++i) {
          const real gd = ws.g_cat_h1d[i] * ws.drop1[i];
          ws.g_cat_h1[i] = ws.cat_h1z[i] > 0.0 ? gd : 0.0;
        }
        ws.g_cat_in.assign(ws.cat_in.size(), 0.0);
        linear_backward(cat_fc1_, P, ws.cat_in.data(), ws.g_cat_h1.data(), ws.g_cat_in.data(),
                        G);
        for (int i = 0; i < C[3]; ++i) {
          ws.g_align_audio[static_cast<std::size_t>(i)] += ws.g_cat_in[static_cast<std::size_t>(i)];
          ws.g_align_visual[static_cast<std::size_t>(i)] +=
              ws.g_cat_in[static_cast<std::size_t>(C[3] + i)];
        }
        break;
      }
    }
  }

  // --- decoder ---
  ws.g_logit_low.resize(ws.logit_low.c, ws.logit_low.h, ws.logit_low.w);
  ws.g_logit_low.zero();
  bilinear4_adjoint(dlogit, ws.input.h, ws.input.w, ws.g_logit_low);
  ws.g_pyr_relu.resize(ws.pyr_relu.c, ws.pyr_relu.h, ws.pyr_relu.w);
  ws.g_pyr_relu.zero();
  conv_backward(dec_head_, P, ws.pyr_relu, ws.g_logit_low, &ws.g_pyr_relu, G);
  for (std::size_t n = 0; n < ws.g_pyr[0].v.size(); ++n)
    ws.g_pyr[0].v[n] = ws.pyr[0].v[n] > 0.0 ? ws.g_pyr_relu.v[n] : 0.0;
  for (int i = 0; i <= 2; ++i) {
    conv_backward(lat_[i], P, ws.fused[i], ws.g_pyr[i], &ws.g_fused[i], G);
    upsample2_adjoint_add(ws.g_pyr[i], ws.g_pyr[i + 1]);
  }
  conv_backward(lat_[3], P, ws.fused[3], ws.g_pyr[3], &ws.g_fused[3], G);

  // --- fusion blocks ---
  for (int i = 0; i < 4; ++i) {
    const FeatureMap& level_in = i == 0 ? ws.enc_r_a : ws.enc_a[i];
    FeatureMap& g_level_in = i == 0 ? ws.g_enc_r_a : ws.g_enc_a[i];
    std::vector<real> g_film_z(ws.film_z[i].size(), 0.0);
    for (int c = 0; c < ws.fused[i].c; ++c) {
      const real g = ws.film_g[i][static_cast<std::size_t>(c)];
      const real th = g - 1.0;  // tanh(film_z)
      real acc = 0.0;
      for (int y = 0; y < ws.fused[i].h; ++y)
        for (int xx = 0; xx < ws.fused[i].w; ++xx) {
          const real gf = ws.g_fused[i].at(c, y, xx);
          ws.g_conv_out[i].at(c, y, xx) += gf * g;
          acc += gf * ws.conv_out[i].at(c, y, xx);
        }
      g_film_z[static_cast<std::size_t>(c)] = acc * (1.0 - th * th);
    }
    linear_backward(film_[i], P, ws.align_audio.data(), g_film_z.data(),
                    ws.g_align_audio.data(), G);

    conv_backward(fuse_expand_[i], P, ws.dsum_a[i], ws.g_conv_out[i], &ws.g_dsum_a[i], G);
    ws.g_scratch_a.resize(ws.dsum_z[i].c, ws.dsum_z[i].h, ws.dsum_z[i].w);
    for (std::size_t n = 0; n < ws.g_scratch_a.v.size(); ++n)
      ws.g_scratch_a.v[n] = ws.dsum_z[i].v[n] > 0.0 ? ws.g_dsum_a[i].v[n] : 0.0;
    for (int j = 0; j < 3; ++j)
      conv_backward(fuse_dil_[i][j], P, ws.red_a[i], ws.g_scratch_a, &ws.g_red_a[i], G);
    ws.g_scratch_b.resize(ws.red_z[i].c, ws.red_z[i].h, ws.red_z[i].w);
    for (std::size_t n = 0; n < ws.g_scratch_b.v.size(); ++n)
      ws.g_scratch_b.v[n] = ws.red_z[i].v[n] > 0.0 ? ws.g_red_a[i].v[n] : 0.0;
    conv_backward(fuse_reduce_[i], P, level_in, ws.g_scratch_b, &g_level_in, G);
  }

  // align projection -> audio feature; pooled branch -> deepest visual map
  linear_backward(align_proj_, P, ws.audio_feat.data(), ws.g_align_audio.data(),
                  ws.g_audio_feat.data(), G);
  {
    const FeatureMap& top = ws.enc_a[3];
    const real inv_hw = 1.0 / (static_cast<real>(top.h) * top.w);
    for (int c = 0; c < top.c; ++c) {
      const real g = ws.g_align_visual[static_cast<std::size_t>(c)] * inv_hw;
      if (g == 0.0) continue;
      for (int y = 0; y < top.h; ++y)
        for (int xx = 0; xx < top.w; ++xx) ws.g_enc_a[3].at(c, y, xx) += g;
    }
  }

  // --- audio MLP ---
  linear_backward(audio_fc2_, P, ws.audio_h1.data(), ws.g_audio_feat.data(),
                  ws.g_audio_h1.data(), G);
  std::vector<real> g_h1z(ws.audio_h1z.size());
  for (std::size_t i = 0; i < g_h1z.size(); ++i)
    g_h1z[i] = ws.audio_h1z[i] > 0.0 ? ws.g_audio_h1[i] : 0.0;
  linear_backward(audio_fc1_, P, ws.audio_in.data(), g_h1z.data(), nullptr, G);

  // --- visual pyramid, deepest first ---
  for (int i = 3; i >= 1; --i) {
    ws.g_scratch_a.resize(ws.enc_z[i].c, ws.enc_z[i].h, ws.enc_z[i].w);
    for (std::size_t n = 0; n < ws.g_scratch_a.v.size(); ++n)
      ws.g_scratch_a.v[n] = ws.enc_z[i].v[n] > 0.0 ? ws.g_enc_a[i].v[n] : 0.0;
    const FeatureMap& in = i == 1 ? ws.enc_r_a : ws.enc_a[i - 1];
    FeatureMap* gin = i == 1 ? &ws.g_enc_r_a : &ws.g_enc_a[i - 1];
    conv_backward(enc_[i], P, in, ws.g_scratch_a, gin, G);
  }
  ws.g_scratch_a.resize(ws.enc_r_z.c, ws.enc_r_z.h, ws.enc_r_z.w);
  for (std::size_t n = 0; n < ws.g_scratch_a.v.size(); ++n)
    ws.g_scratch_a.v[n] = ws.enc_r_z.v[n] > 0.0 ? ws.g_enc_r_a.v[n] : 0.0;
  conv_backward(enc_refine_, P, ws.enc_a[0], ws.g_scratch_a, &ws.g_enc_a[0], G);
  ws.g_scratch_a.resize(ws.enc_z[0].c, ws.enc_z[0].h, ws.enc_z[0].w);
  for (std::size_t n = 0; n < ws.g_scratch_a.v.size(); ++n)
    ws.g_scratch_a.v[n] = ws.enc_z[0].v[n] > 0.0 ? ws.g_enc_a[0].v[n] : 0.0;
  conv_backward(enc_[0], P, ws.input, ws.g_scratch_a, nullptr, G);
}

MultiScaleFeatures Network::encode_visual(const FeatureMap& frame) const {
  check_frame(frame);
  const real* P = store_.values().data();
  MultiScaleFeatures out;
  FeatureMap z, stage1;
  conv_forward(enc_[0], P, frame, z);
  relu(z, stage1);
  conv_forward(enc_refine_, P, stage1, z);
  relu(z, out.levels[0]);
  const FeatureMap* x = &out.levels[0];
  for (int i = 1; i < 4; ++i) {
    conv_forward(enc_[i], P, *x, z);
    relu(z, out.levels[i]);
    x = &out.levels[i];
  }
  return out;
}

std::vector<real> Network::encode_audio(const Spectrogram& spec) const {
  check_audio(spec);
  const real* P = store_.values().data();
  std::vector<real> in(spec.values.begin(), spec.values.end());
  std::vector<real> h1z(audio_fc1_.out), h1, out(audio_fc2_.out);
  linear_forward(audio_fc1_, P, in.data(), h1z.data());
  relu_vec(h1z, h1);
  linear_forward(audio_fc2_, P, h1.data(), out.data());
  return out;
}

AlignedPair Network::align(const std::vector<real>& audio_feat,
                           const MultiScaleFeatures& feats) const {
  if (static_cast<int>(audio_feat.size()) != cfg_.audio_dim)
    throw ContractError("audio feature dimension mismatch");
  const real* P = store_.values().data();
  AlignedPair pair;
  pair.audio_proj.resize(align_proj_.out);
  linear_forward(align_proj_, P, audio_feat.data(), pair.audio_proj.data());
  const FeatureMap& top = feats.levels[3];
  pair.visual_pooled.assign(top.c, 0.0);
  const real inv_hw = 1.0 / (static_cast<real>(top.h) * top.w);
  for (int c = 0; c < top.c; ++c) {
    real s = 0.0;
    for (int y = 0; y < top.h; ++y)
      for (int x = 0; x < top.w; ++x) s += top.at(c, y, x);
    pair.visual_pooled[static_cast<std::size_t>(c)] = s * inv_hw;
  }
  return pair;
}

real Network::similarity(const AlignedPair& pair) const {
  if (pair.audio_proj.size() != pair.visual_pooled.size())
    throw ContractError("aligned pair dimension mismatch");
  const real* P = store_.values().data();
  switch (cfg_.head) {
    case SimilarityHeadKind::cosine: {
      const real na = norm2(pair.audio_proj);
      const real nv = norm2(pair.visual_pooled);
      if (na < kNormFloor || nv < kNormFloor) return 0.0;
      return dot(pair.audio_proj, pair.visual_pooled) / (na * nv);
    }
    case SimilarityHeadKind::euclidean: {
      real d2 = 0.0;
      for (std::size_t i = 0; i < pair.audio_proj.size(); ++i) {
        const real d = pair.audio_proj[i] - pair.visual_pooled[i];
        d2 += d * d;
      }
      return -std::sqrt(d2);
    }
    case SimilarityHeadKind::concat: {
      std::vector<real> cat(pair.audio_proj.size() + pair.visual_pooled.size());
      std::copy(pair.audio_proj.begin(), pair.audio_proj.end(), cat.begin());
      std::copy(pair.visual_pooled.begin(), pair.visual_pooled.end(),
                cat.begin() + static_cast<std::ptrdiff_t>(pair.audio_proj.size()));
      std::vector<real> h1z(cat_fc1_.out), h1, h2z(cat_fc2_.out), h2;
      linear_forward(cat_fc1_, P, cat.data(), h1z.data());
      relu_vec(h1z, h1);
      linear_forward(cat_fc2_, P, h1.data(), h2z.data());
      relu_vec(h2z, h2);
      real s = 0.0;
      linear_forward(cat_fc3_, P, h2.data(), &s);
      return s;
    }
  }
  return 0.0;
}

MultiScaleFeatures Network::fuse(const MultiScaleFeatures& feats,
                                 const std::vector<real>& audio_feat) const {
  if (static_cast<int>(audio_feat.size()) != cfg_.audio_dim)
    throw ContractError("audio feature dimension mismatch");
  const real* P = store_.values().data();
  std::vector<real> audio_proj(align_proj_.out);
  linear_forward(align_proj_, P, audio_feat.data(), audio_proj.data());
  MultiScaleFeatures out;
  FeatureMap red_z, red_a, dil, dsum_z, dsum_a, expanded;
  for (int i = 0; i < 4; ++i) {
    conv_forward(fuse_reduce_[i], P, feats.levels[i], red_z);
    relu(red_z, red_a);
    dsum_z.resize(red_a.c, red_a.h, red_a.w);
    dsum_z.zero();
    for (int j = 0; j < 3; ++j) {
      conv_forward(fuse_dil_[i][j], P, red_a, dil);
      for (std::size_t n = 0; n < dsum_z.v.size(); ++n) dsum_z.v[n] += dil.v[n];
    }
    relu(dsum_z, dsum_a);
    conv_forward(fuse_expand_[i], P, dsum_a, expanded);

    std::vector<real> film_z(film_[i].out);
    linear_forward(film_[i], P, audio_proj.data(), film_z.data());
    out.levels[i].resize(expanded.c, expanded.h, expanded.w);
    for (int c = 0; c < expanded.c; ++c) {
      const real g = 1.0 + std::tanh(film_z[static_cast<std::size_t>(c)]);
      for (int y = 0; y < expanded.h; ++y)
        for (int x = 0; x < expanded.w; ++x) out.levels[i].at(c, y, x) = expanded.at(c, y, x) * g;
    }
  }
  return out;
}

ProbMask Network::decode(const MultiScaleFeatures& fused) const {
  const real* P = store_.values().data();
  std::array<FeatureMap, 4> lat, pyr;
  for (int i = 0; i < 4; ++i) conv_forward(lat_[i], P, fused.levels[i], lat[i]);
  pyr[3] = lat[3];
  for (int i = 2; i >= 0; --i) {
    pyr[i] = lat[i];
    upsample2_add(pyr[i + 1], pyr[i]);
  }
  FeatureMap act, logit_low;
  relu(pyr[0], act);
  conv_forward(dec_head_, P, act, logit_low);
  const int oh = logit_low.h * 4;
  const int ow = logit_low.w * 4;
  std::vector<real> logit_full;
  bilinear4(logit_low, logit_full, oh, ow);
  ProbMask prob(oh, ow);
  for (std::size_t i = 0; i < logit_full.size(); ++i) prob.probs[i] = sigmoid_stable(logit_full[i]);
  return prob;
}

Network::ForwardOutput Network::forward(const FeatureMap& frame, const Spectrogram& spec) const {
  Workspace ws;
  forward(ws, frame, spec, false, 0);
  return {ws.prob, ws.score};
}

}  // namespace avsr

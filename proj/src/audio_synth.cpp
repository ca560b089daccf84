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

#include "avsr/audio_synth.hpp"

#include <algorithm>
#include <cmath>

#include "avsr/rng.hpp"

namespace avsr {

double envelope_value(int envelope_id, int t, int frames) {
  const double u = (t + 0.5) / frames;
  switch (envelope_id) {
    case 0: return 1.0;
    case 1: return u;
    case 2: return 1.0 - u;
    case 3: return std::sin(M_PI * u);
    case 4: return 0.0;
    default: throw ContractError("unknown envelope id: " + std::to_string(envelope_id));
  }
}

Spectrogram gen_positive_audio(const std::vector<const ObjectClassSpec*>& sounding, int frames,
                               int bins, std::uint64_t seed, double floor_amp) {
  if (sounding.empty()) throw ContractError("gen_positive_audio needs >= 1 sounding class");
  Spectrogram spec(frames, bins);
  for (const auto* cls : sounding) {
    for (int b : cls->signature.bins) {
      if (b >= bins)
        throw ContractError("signature bin " + std::to_string(b) + " outside spectrogram");
      for (int t = 0; t < frames; ++t)
        spec.at(t, b) += cls->signature.amplitude *
                         envelope_value(cls->signature.envelope_id, t, frames);
    }
  }
  Rng rng(seed);
  for (auto& v : spec.values) v = std::max(0.0, v + floor_amp * rng.normal());
  return spec;
}

Spectrogram make_silence(int frames, int bins) { return Spectrogram(frames, bins); }

Spectrogram make_noise(std::uint64_t seed, int frames, int bins, double amplitude) {
  Spectrogram spec(frames, bins);
  Rng rng(seed);
  for (auto& v : spec.values) v = std::abs(amplitude * rng.normal());
  return spec;
}

std::pair<Spectrogram, const ObjectClassSpec*> sample_offscreen(
    const std::vector<std::string>& excluded_categories, const CategoryTaxonomy& taxonomy,
    std::uint64_t seed, int frames, int bins) {
  const auto eligible = taxonomy.outside_categories(excluded_categories, false);
  if (eligible.empty())
    throw ContractError("no category left to sample an off-screen sound from");
  Rng rng(seed);
  const auto* cls = eligible[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))];
  Spectrogram spec =
      gen_positive_audio({cls}, frames, bins, child_seed(seed, "offscreen_floor"));
  return {std::move(spec), cls};
}

std::pair<Spectrogram, const ObjectClassSpec*> sample_offscreen(
    const std::string& target_category, const CategoryTaxonomy& taxonomy, std::uint64_t seed,
    int frames, int bins) {
  return sample_offscreen(std::vector<std::string>{target_category}, taxonomy, seed, frames,
                          bins);
}

}  // namespace avsr

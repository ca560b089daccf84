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

#ifndef AVSR_AUDIO_SYNTH_HPP
#define AVSR_AUDIO_SYNTH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "avsr/spectrogram.hpp"
#include "avsr/taxonomy.hpp"

namespace avsr {

constexpr double kAudioFloorAmplitude = 0.01;
constexpr double kNoiseAmplitude = 0.5;

// Ambient variability in the corpus: noise-condition loudness and the
// positive-audio floor are drawn per record from these ranges, so "how much
// energy" never separates conditions by itself; the spectral pattern does.
constexpr double kNoiseAmplitudeMin = 0.2;
constexpr double kNoiseAmplitudeMax = 0.9;
constexpr double kFloorAmplitudeMin = 0.01;
constexpr double kFloorAmplitudeMax = 0.30;

// Temporal envelope value at time bin t of `frames`.
double envelope_value(int envelope_id, int t, int frames);

// Sum of the sounding classes' signature bins modulated by their envelopes,
// plus a Gaussian floor of amplitude floor_amp, clipped to >= 0.
Spectrogram gen_positive_audio(const std::vector<const ObjectClassSpec*>& sounding, int frames,
                               int bins, std::uint64_t seed,
                               double floor_amp = kAudioFloorAmplitude);

Spectrogram make_silence(int frames, int bins);

// Seeded half-normal noise |N(0, amplitude^2)|; spectrally flat.
Spectrogram make_noise(std::uint64_t seed, int frames, int bins, double amplitude);

// Uniformly samples a class whose super-category is in none of `excluded`
// and returns its positive-style audio. Held-out classes are skipped so
// off-screen sounds in the corpus stay within the training vocabulary.
// Throws ContractError when no category remains.
std::pair<Spectrogram, const ObjectClassSpec*> sample_offscreen(
    const std::vector<std::string>& excluded_categories, const CategoryTaxonomy& taxonomy,
    std::uint64_t seed, int frames, int bins);

// Single-category exclusion convenience.
std::pair<Spectrogram, const ObjectClassSpec*> sample_offscreen(
    const std::string& target_category, const CategoryTaxonomy& taxonomy, std::uint64_t seed,
    int frames, int bins);

}  // namespace avsr

#endif  // AVSR_AUDIO_SYNTH_HPP

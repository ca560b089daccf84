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

#ifndef AVSR_CHECKPOINT_HPP
#define AVSR_CHECKPOINT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avsr/config.hpp"
#include "avsr/network.hpp"

namespace avsr {

struct AdamState {
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// On-disk layout: magic "AVSC", a little-endian uint64 header length, a JSON
// header (run/model config, parameter names and shapes, seed, epoch, section
// table), then the sections in declared order. The first section is always
// the parameters as contiguous 32-bit little-endian floats in header order;
// a float64 copy and Adam moments follow so training resumes exactly.
void save_checkpoint(const std::string& path, const Network& net, const RunConfig& run_cfg,
                     std::uint64_t seed, int epoch, double best_val_gmiou,
                     const AdamState* adam);

struct LoadedCheckpoint {
  RunConfig run_config;
  ModelConfig model_config;
  std::uint64_t seed = 0;
  int epoch = 0;
  double best_val_gmiou = 0.0;
  std::vector<double> params;
  std::optional<AdamState> adam;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Rebuilds the network and verifies that the checkpoint's declared parameter
// groups match the architecture implied by its model config.
Network network_from_checkpoint(const LoadedCheckpoint& ckpt);

// Digest of the float32 parameter payload, for report fingerprints.
std::string checkpoint_digest(const std::string& path);

}  // namespace avsr

#endif  // AVSR_CHECKPOINT_HPP

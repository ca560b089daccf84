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

#ifndef AVSR_TRAINER_HPP
#define AVSR_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "avsr/checkpoint.hpp"
#include "avsr/config.hpp"
#include "avsr/dataset.hpp"

namespace avsr {

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    step = 0;
  }
  void update(std::vector<double>& params, const std::vector<double>& grad);
};

struct Batch {
  std::vector<std::size_t> indices;  // into the training Dataset
};

// Seeded shuffle of [0, n), chunked into batches; the last batch may be
// short. The shuffle depends only on (seed, epoch), so interrupted runs
// resume on the exact same order.
std::vector<Batch> sample_epoch_batches(std::size_t n, int batch_size, std::uint64_t seed,
                                        int epoch);

struct EpochLog {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_seg = 0.0;
  double loss_bce = 0.0;
  double val_miou_p = 0.0;
  double val_gfpr = 0.0;
  double val_gmiou = 0.0;
};

struct FitOptions {
  std::string run_dir;
  int num_threads = 0;       // 0: hardware concurrency
  std::string resume_from;   // optional checkpoint path
};

struct FitResult {
  bool diverged = false;
  std::string divergence_info;
  std::vector<EpochLog> log;
  std::string best_checkpoint;
  std::string last_checkpoint;
  int best_epoch = -1;
  double best_val_gmiou = -1.0;
};

// Minimizes lambda * L_sim + L_seg with Adam over the rho-mixed training
// manifest; tracks the best validation G-mIoU checkpoint and appends one CSV
// row per epoch to <run_dir>/epochs.csv. Bit-identical for a fixed seed,
// regardless of thread count.
FitResult fit(const RunConfig& cfg, const std::string& train_manifest,
              const std::string& val_manifest, const FitOptions& options);

// One full forward/backward over a batch: returns the batch loss terms and
// accumulates the total-loss gradient (mean over the batch) into grad.
// Exposed for gradient checks.
struct BatchLoss {
  double seg = 0.0;
  double bce = 0.0;
  double total = 0.0;
};

// Per-slot buffers reused across batches; one per batch position, so worker
// threads never share state.
struct BatchScratch {
  std::vector<Network::Workspace> ws;
  std::vector<std::vector<double>> grads;
  std::vector<std::vector<double>> dlogits;
};

BatchLoss batch_loss_and_grad(const Network& net, const Dataset& ds, const Batch& batch,
                              double lambda, std::vector<double>& grad, bool train_mode,
                              std::uint64_t dropout_seed, int num_threads,
                              BatchScratch& scratch);
BatchLoss batch_loss_and_grad(const Network& net, const Dataset& ds, const Batch& batch,
                              double lambda, std::vector<double>& grad, bool train_mode,
                              std::uint64_t dropout_seed, int num_threads);

}  // namespace avsr

#endif  // AVSR_TRAINER_HPP

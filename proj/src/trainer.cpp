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

#include "avsr/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "avsr/evalharness.hpp"
#include "avsr/fsutil.hpp"
#include "avsr/losses.hpp"
#include "avsr/parallel.hpp"
#include "avsr/rng.hpp"

namespace avsr {

namespace fs = std::filesystem;

void Adam::update(std::vector<double>& params, const std::vector<double>& grad) {
  ++step;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mh = m[i] / bc1;
    const double vh = v[i] / bc2;
    params[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

std::vector<Batch> sample_epoch_batches(std::size_t n, int batch_size, std::uint64_t seed,
                                        int epoch) {
  if (n == 0) throw ContractError("cannot batch an empty dataset");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(child_seed(seed, "epoch_" + std::to_string(epoch)));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    Batch b;
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(b));
  }
  return batches;
}

BatchLoss batch_loss_and_grad(const Network& net, const Dataset& ds, const Batch& batch,
                              double lambda, std::vector<double>& grad, bool train_mode,
                              std::uint64_t dropout_seed, int num_threads,
                              BatchScratch& scratch) {
  const int b_size = static_cast<int>(batch.indices.size());
  if (b_size == 0) throw ContractError("empty batch");

  if (static_cast<int>(scratch.ws.size()) < b_size) {
    scratch.ws.resize(static_cast<std::size_t>(b_size));
    scratch.grads.resize(static_cast<std::size_t>(b_size));
    scratch.dlogits.resize(static_cast<std::size_t>(b_size));
  }
  std::vector<double> seg_terms(static_cast<std::size_t>(b_size));
  std::vector<double> bce_terms(static_cast<std::size_t>(b_size));

  const double inv_b = 1.0 / static_cast<double>(b_size);
  parallel_for(b_size, num_threads, [&](int i) {
    const LoadedSample& s = ds.sample(batch.indices[static_cast<std::size_t>(i)]);
    Network::Workspace& ws = scratch.ws[static_cast<std::size_t>(i)];
    net.forward(ws, *s.frame, *s.audio, train_mode,
                child_seed(dropout_seed, "slot_" + std::to_string(i)));
    seg_terms[static_cast<std::size_t>(i)] = seg_loss(ws.prob, *s.gt);
    bce_terms[static_cast<std::size_t>(i)] = sim_bce_term(ws.score, s.label);

    seg_loss_grad_wrt_logit(ws.prob, *s.gt, inv_b, scratch.dlogits[static_cast<std::size_t>(i)]);
    const double dscore = lambda * inv_b * sim_bce_grad(ws.score, s.label);
    auto& g = scratch.grads[static_cast<std::size_t>(i)];
    g.assign(net.param_count(), 0.0);
    net.backward(ws, scratch.dlogits[static_cast<std::size_t>(i)], dscore, g);
  });

  // Fixed-order reduction keeps results identical for any thread count.
  for (int i = 0; i < b_size; ++i) {
    const auto& g = scratch.grads[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
  }

  BatchLoss loss;
  for (int i = 0; i < b_size; ++i) {
    loss.seg += seg_terms[static_cast<std::size_t>(i)] * inv_b;
    loss.bce += bce_terms[static_cast<std::size_t>(i)] * inv_b;
  }
  loss.total = total_loss(loss.bce, loss.seg, lambda);
  return loss;
}

BatchLoss batch_loss_and_grad(const Network& net, const Dataset& ds, const Batch& batch,
                              double lambda, std::vector<double>& grad, bool train_mode,
                              std::uint64_t dropout_seed, int num_threads) {
  BatchScratch scratch;
  return batch_loss_and_grad(net, ds, batch, lambda, grad, train_mode, dropout_seed,
                             num_threads, scratch);
}

namespace {

std::string csv_header() {
  return "epoch,loss_total,loss_seg,loss_bce,val_miou_p,val_gfpr,val_gmiou\n";
}

std::string csv_line(const EpochLog& e) {
  return csv_row({std::to_string(e.epoch), fmt_double(e.loss_total), fmt_double(e.loss_seg),
                  fmt_double(e.loss_bce), fmt_double(e.val_miou_p), fmt_double(e.val_gfpr),
                  fmt_double(e.val_gmiou)});
}

}  // namespace

FitResult fit(const RunConfig& cfg, const std::string& train_manifest,
              const std::string& val_manifest, const FitOptions& options) {
  cfg.validate();
  if (options.run_dir.empty()) throw ContractError("fit needs a run directory");
  fs::create_directories(options.run_dir);

  Dataset train_ds(train_manifest);
  Dataset val_ds(val_manifest);

  const ModelConfig model_cfg = ModelConfig::for_run(
      cfg, train_ds.frame_height(), train_ds.spec_frames(), train_ds.spec_bins());
  Network net(model_cfg, child_seed(cfg.seed, "init"));

  Adam adam;
  adam.lr = cfg.learning_rate;
  adam.init(net.param_count());

  int start_epoch = 0;
  double best_val_gmiou = -1.0;
  if (!options.resume_from.empty()) {
    const LoadedCheckpoint ckpt = load_checkpoint(options.resume_from);
    if (!(ckpt.model_config == model_cfg))
      throw ContractError("resume checkpoint does not match the run's model config");
    net.params().values() = ckpt.params;
    if (ckpt.adam) {
      adam.m = ckpt.adam->m;
      adam.v = ckpt.adam->v;
      adam.step = ckpt.adam->step;
    }
    start_epoch = ckpt.epoch;
    best_val_gmiou = ckpt.best_val_gmiou;
  }

  cfg.save_json_file((fs::path(options.run_dir) / "config.json").string());
  const std::string csv_path = (fs::path(options.run_dir) / "epochs.csv").string();
  std::ofstream csv(csv_path, start_epoch == 0 ? std::ios::trunc : std::ios::app);
  if (!csv) throw IoError("cannot open epoch log: " + csv_path);
  if (start_epoch == 0) csv << csv_header();

  FitResult result;
  result.best_val_gmiou = best_val_gmiou;
  result.best_checkpoint = (fs::path(options.run_dir) / "checkpoint_best.avsc").string();
  result.last_checkpoint = (fs::path(options.run_dir) / "checkpoint_last.avsc").string();

  std::vector<double> grad(net.param_count());
  BatchScratch scratch;
  const std::size_t n = train_ds.size();

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto batches = sample_epoch_batches(n, cfg.batch_size, cfg.seed, epoch);
    double seg_sum = 0.0, bce_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::fill(grad.begin(), grad.end(), 0.0);
      const std::uint64_t batch_seed = child_seed(
          cfg.seed, "dropout_" + std::to_string(epoch) + "_" + std::to_string(b));
      const BatchLoss loss =
          batch_loss_and_grad(net, train_ds, batches[b], cfg.lambda_weight, grad, true,
                              batch_seed, options.num_threads, scratch);
      if (!std::isfinite(loss.total)) {
        char info[160];
        std::snprintf(info, sizeof(info),
                      "non-finite loss at epoch %d batch %zu (batch seed 0x%016llx)", epoch, b,
                      static_cast<unsigned long long>(batch_seed));
        result.diverged = true;
        result.divergence_info = info;
        return result;
      }
      adam.update(net.params().values(), grad);
      seg_sum += loss.seg * static_cast<double>(batches[b].indices.size());
      bce_sum += loss.bce * static_cast<double>(batches[b].indices.size());
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss_seg = seg_sum / static_cast<double>(n);
    log.loss_bce = bce_sum / static_cast<double>(n);
    log.loss_total = total_loss(log.loss_bce, log.loss_seg, cfg.lambda_weight);

    EvalOptions eval_opt;
    eval_opt.num_threads = options.num_threads;
    const MetricsReport val = evaluate_network(net, val_ds, cfg, eval_opt, "val");
    log.val_miou_p = val.condition(ConditionKind::positive).miou;
    log.val_gfpr = val.g_fpr;
    log.val_gmiou = val.g_miou;
    csv << csv_line(log);
    csv.flush();
    result.log.push_back(log);

    AdamState adam_state{adam.step, adam.m, adam.v};
    save_checkpoint(result.last_checkpoint, net, cfg, cfg.seed, epoch + 1, best_val_gmiou,
                    &adam_state);
    if (log.val_gmiou > best_val_gmiou) {
      best_val_gmiou = log.val_gmiou;
      result.best_epoch = epoch;
      save_checkpoint(result.best_checkpoint, net, cfg, cfg.seed, epoch + 1, best_val_gmiou,
                      &adam_state);
    }
  }
  result.best_val_gmiou = best_val_gmiou;
  if (result.best_epoch < 0 && !result.log.empty()) {
    // Resumed run that never improved: keep the pre-existing best checkpoint.
    result.best_epoch = start_epoch - 1;
  }
  return result;
}

}  // namespace avsr

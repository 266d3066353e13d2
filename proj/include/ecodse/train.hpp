#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecodse/dataset.hpp"
#include "ecodse/ecognn.hpp"

namespace ecodse {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Default loss is the per-target RMSE summed across targets; the joint
  /// variant takes one square root over the pooled squared error instead.
  bool joint_rmse = false;
};

struct TargetMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape;  // absent when a target value is zero
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  std::map<std::string, TargetMetrics> train;
  std::map<std::string, TargetMetrics> validation;

  double train_rmse_sum() const;
  double validation_rmse_sum() const;
};

struct TrainResult {
  EcognnModel model;  // best validation score; last finite state on divergence
  int best_epoch = -1;
  std::vector<EpochRecord> history;
  bool diverged = false;
};

/// Adam on the configured loss. Deterministic given (seed, data, config):
/// batch order, sampling noise and updates all derive from the seed.
TrainResult train(const EcognnModel& initial, const std::vector<CdfgGraph>& train_set,
                  const std::vector<CdfgGraph>& validation_set, const TrainConfig& config);

/// Per-target metrics of a model over a labeled set (fixed evaluation noise).
std::map<std::string, TargetMetrics> evaluate_metrics(const EcognnModel& model,
                                                      const std::vector<CdfgGraph>& graphs,
                                                      std::uint64_t eval_seed);

/// Input-column affine normalization derived from the manifest: one-hot block
/// columns pass through, numeric columns use the per-field normalization
/// entry when one exists.
std::pair<std::vector<double>, std::vector<double>> feature_normalization_from_manifest(
    const DatasetManifest& manifest);

/// Compares reverse-mode gradients against central finite differences over
/// every parameter block (or just the named ones). Sampling noise is frozen
/// so the loss is smooth in the parameters. Returns the worst relative error.
double grad_check(const EcognnModel& model, const CdfgGraph& graph, double epsilon,
                  const std::vector<std::string>& only_blocks = {});

void write_metrics_csv(const std::string& path, const std::vector<EpochRecord>& history,
                       const std::string& config_echo);

}  // namespace ecodse

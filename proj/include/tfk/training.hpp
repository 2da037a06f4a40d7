#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "tfk/loss.hpp"
#include "tfk/metrics.hpp"
#include "tfk/model.hpp"
#include "tfk/optimizer.hpp"

namespace tfk {

struct TrainConfig {
  double learning_rate = 0.1;
  double huber_delta = 10.0;
  int total_batches = 5000;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  int validation_interval = 250;

  void validate() const;
};

struct ValidationRecord {
  int batch = 0;  // number of completed batches
  double loss = 0.0;
  MetricsReport metrics;
};

struct TrainHistory {
  std::vector<double> train_loss;  // loss of batch i before its update
  std::vector<ValidationRecord> validation;
  int best_batch = -1;
  double best_validation_loss = std::numeric_limits<double>::infinity();
};

/// Everything needed to continue a run bit-for-bit.
struct TrainState {
  ParameterStore parameters;
  ParameterStore best_parameters;
  std::optional<Optimizer> optimizer;
  int completed_batches = 0;
  TrainHistory history;
};

/// Index of the training system used for batch `batch`: each epoch visits
/// every system once in an order drawn from (seed, epoch).
int batch_system(std::uint64_t seed, int batch, int n_systems);

/// Mean of per-system batch losses.
double evaluate_loss(const Model& model, std::span<const AtomSystem> systems, double delta);

/// Metric suite pooled over the masked atoms of all systems.
MetricsReport evaluate_metrics(const Model& model, std::span<const AtomSystem> systems);

/// Gradient of the batch loss on one system.
struct LossAndGradient {
  double loss = 0.0;
  ParameterStore gradient;
};
LossAndGradient loss_and_gradient(const Model& model, const AtomSystem& system, double delta);

using ProgressCallback = std::function<void(int completed_batches, const TrainHistory& history)>;

/// One system per batch, optimizer step after each; validation every
/// `validation_interval` batches and after the last. The model ends with its
/// final parameters; the best-by-validation parameters are in the state.
/// Passing a state resumes from it. Throws DivergenceError on a non-finite
/// loss or gradient.
TrainState train(Model& model, std::span<const AtomSystem> train_set, std::span<const AtomSystem> validation_set,
                 const TrainConfig& config, std::optional<TrainState> resume = std::nullopt,
                 const ProgressCallback& progress = {});

}  // namespace tfk

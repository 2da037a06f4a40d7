#include "tfk/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tfk/error.hpp"
#include "tfk/random.hpp"

namespace tfk {

namespace {

bool all_finite(const ParameterStore& p) {
  for (const auto& a : p.arrays())
    for (double v : a.values)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be finite and >= 0");
  if (!(huber_delta > 0.0)) fail("Huber delta must be positive");
  if (total_batches < 1) fail("total batches must be at least 1");
  if (validation_interval < 1) fail("validation interval must be at least 1");
}

int batch_system(std::uint64_t seed, int batch, int n_systems) {
  if (n_systems < 1) fail("empty training set");
  const int epoch = batch / n_systems;
  std::vector<int> order(n_systems);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = substream(seed, "data-order", static_cast<std::uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order[batch % n_systems];
}

double evaluate_loss(const Model& model, std::span<const AtomSystem> systems, double delta) {
  if (systems.empty()) fail("no systems to evaluate");
  double total = 0.0;
  for (const auto& s : systems) total += batch_loss(model.forward(s), s, delta).loss;
  return total / static_cast<double>(systems.size());
}

MetricsReport evaluate_metrics(const Model& model, std::span<const AtomSystem> systems) {
  if (systems.empty()) fail("no systems to evaluate");
  Positions pv, tv;
  std::vector<double> ps;
  std::vector<std::uint8_t> mask;
  for (const auto& s : systems) {
    if (!s.targets) fail("system '" + s.identifier + "' has no targets");
    const Prediction p = model.forward(s);
    pv.insert(pv.end(), p.vectors.begin(), p.vectors.end());
    ps.insert(ps.end(), p.scalars.begin(), p.scalars.end());
    tv.insert(tv.end(), s.targets->begin(), s.targets->end());
    mask.insert(mask.end(), s.predict_mask.begin(), s.predict_mask.end());
  }
  if (model.config().output_order() == 1) return metric_suite(pv, tv, mask);
  return magnitude_metrics(ps, tv, mask);
}

LossAndGradient loss_and_gradient(const Model& model, const AtomSystem& system, double delta) {
  const ForwardTape tape = model.forward_tape(system);
  const BatchLoss bl = batch_loss(tape.prediction, system, delta);
  if (!std::isfinite(bl.loss)) throw DivergenceError("non-finite loss on system '" + system.identifier + "'");
  return {bl.loss, model.backward(tape, bl.gradient)};
}

TrainState train(Model& model, std::span<const AtomSystem> train_set, std::span<const AtomSystem> validation_set,
                 const TrainConfig& config, std::optional<TrainState> resume, const ProgressCallback& progress) {
  config.validate();
  if (train_set.empty()) fail("training set is empty");
  for (const auto& s : train_set) {
    s.validate();
    model.element_indices(s);
    if (!s.targets) fail("training system '" + s.identifier + "' has no targets");
  }

  TrainState state;
  if (resume) {
    state = std::move(*resume);
    if (!state.parameters.same_layout(model.parameters())) fail("resume state does not match model layout");
    model.parameters() = state.parameters;
  } else {
    state.best_parameters = model.parameters();
  }
  if (!state.optimizer) state.optimizer.emplace(config.optimizer, config.learning_rate, model.parameters());

  const int n = static_cast<int>(train_set.size());
  for (int b = state.completed_batches; b < config.total_batches; ++b) {
    const AtomSystem& system = train_set[batch_system(config.seed, b, n)];
    LossAndGradient lg = loss_and_gradient(model, system, config.huber_delta);
    if (!all_finite(lg.gradient)) {
      throw DivergenceError("non-finite gradient at batch " + std::to_string(b) + " on system '" + system.identifier + "'");
    }
    state.history.train_loss.push_back(lg.loss);
    state.optimizer->step(model.parameters(), lg.gradient);
    if (!all_finite(model.parameters())) {
      throw DivergenceError("parameters became non-finite at batch " + std::to_string(b) +
                            " (loss " + std::to_string(lg.loss) + "); lower the learning rate");
    }
    state.completed_batches = b + 1;

    const bool validate_now = state.completed_batches % config.validation_interval == 0 ||
                              state.completed_batches == config.total_batches;
    if (validate_now) {
      if (!validation_set.empty()) {
        ValidationRecord rec;
        rec.batch = state.completed_batches;
        rec.loss = evaluate_loss(model, validation_set, config.huber_delta);
        if (!std::isfinite(rec.loss)) throw DivergenceError("non-finite validation loss at batch " + std::to_string(b));
        rec.metrics = evaluate_metrics(model, validation_set);
        state.history.validation.push_back(rec);
        if (rec.loss < state.history.best_validation_loss) {
          state.history.best_validation_loss = rec.loss;
          state.history.best_batch = rec.batch;
          state.best_parameters = model.parameters();
        }
      } else {
        state.history.best_batch = state.completed_batches;
        state.best_parameters = model.parameters();
      }
      if (progress) progress(state.completed_batches, state.history);
    }
  }
  state.parameters = model.parameters();
  return state;
}

}  // namespace tfk

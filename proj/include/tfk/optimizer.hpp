#pragma once

#include <string>

#include "tfk/parameters.hpp"

namespace tfk {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

/// Plain SGD or Adam over a ParameterStore. Adam keeps first and second
/// moment estimates in stores of the same layout.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, const ParameterStore& layout);

  void step(ParameterStore& params, const ParameterStore& grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  long steps() const { return steps_; }

  // State, exposed for checkpointing.
  ParameterStore& first_moment() { return m_; }
  ParameterStore& second_moment() { return v_; }
  const ParameterStore& first_moment() const { return m_; }
  const ParameterStore& second_moment() const { return v_; }
  void set_steps(long steps) { steps_ = steps; }

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

 private:
  OptimizerKind kind_;
  double learning_rate_;
  long steps_ = 0;
  ParameterStore m_;
  ParameterStore v_;
};

}  // namespace tfk

#include "tfk/optimizer.hpp"

#include <cmath>

#include "tfk/error.hpp"

namespace tfk {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  fail("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, const ParameterStore& layout)
    : kind_(kind), learning_rate_(learning_rate) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be finite and >= 0");
  if (kind == OptimizerKind::kAdam) {
    m_ = layout.zeros_like();
    v_ = layout.zeros_like();
  }
}

void Optimizer::step(ParameterStore& params, const ParameterStore& grads) {
  if (!params.same_layout(grads)) fail("gradient layout does not match parameters");
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    for (int i = 0; i < params.size(); ++i) {
      auto& p = params[i].values;
      const auto& g = grads[i].values;
      for (std::size_t j = 0; j < p.size(); ++j) p[j] -= learning_rate_ * g[j];
    }
    return;
  }
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps_));
  for (int i = 0; i < params.size(); ++i) {
    auto& p = params[i].values;
    auto& m = m_[i].values;
    auto& v = v_[i].values;
    const auto& g = grads[i].values;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
      v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
      p[j] -= learning_rate_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + epsilon);
    }
  }
}

}  // namespace tfk

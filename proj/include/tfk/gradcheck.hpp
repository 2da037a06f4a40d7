#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfk/model.hpp"

namespace tfk {

struct GradientCheckReport {
  struct KindResult {
    std::string kind;
    int sampled = 0;
    double max_relative_error = 0.0;
    std::string worst_parameter;
  };
  std::vector<KindResult> kinds;
  double max_relative_error = 0.0;
};

struct GradientCheckSettings {
  int samples_per_kind = 200;
  double step = 1e-5;
  double huber_delta = 1.0;
  /// Denominator floor for the relative error.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double gradient_relative_error(double analytic, double numeric, double floor);

/// Compares reverse-mode gradients of the batch loss with central differences
/// on parameters sampled per layer kind. `model` is restored on return.
GradientCheckReport check_gradients(Model& model, const AtomSystem& system, const GradientCheckSettings& settings);

}  // namespace tfk

#pragma once

#include <Eigen/Core>

#include "tfk/model.hpp"

namespace tfk {

/// Huber penalty of a residual with L2 norm `distance`:
/// d^2 / 2 for d <= delta, (d - delta / 2) delta otherwise.
double huber(double distance, double delta);

/// Tensor Huber loss between two same-shaped tensors.
double huber_tensor_loss(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target, double delta);

struct BatchLoss {
  double loss = 0.0;        // mean over masked atoms
  Prediction gradient;      // dL/d(prediction)
  int counted = 0;
};

/// Mean Huber loss over the masked atoms of one system. Vector models
/// compare vectors; the order-0 model compares its scalar with the target
/// magnitude.
BatchLoss batch_loss(const Prediction& prediction, const AtomSystem& system, double delta);

}  // namespace tfk

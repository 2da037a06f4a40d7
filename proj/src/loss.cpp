#include "tfk/loss.hpp"

#include <cmath>

#include "tfk/error.hpp"

namespace tfk {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0)) fail("Huber delta must be positive");
}

}  // namespace

double huber(double distance, double delta) {
  check_delta(delta);
  return distance <= delta ? 0.5 * distance * distance : (distance - 0.5 * delta) * delta;
}

double huber_tensor_loss(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target, double delta) {
  if (predicted.size() != target.size()) fail("tensor shape mismatch in Huber loss");
  return huber((predicted - target).norm(), delta);
}

BatchLoss batch_loss(const Prediction& prediction, const AtomSystem& system, double delta) {
  check_delta(delta);
  if (!system.targets) fail("system '" + system.identifier + "' has no targets");
  const Positions& targets = *system.targets;
  const int n = system.size();
  BatchLoss out;
  out.counted = system.masked_count();
  if (out.counted == 0) fail("system '" + system.identifier + "' has no masked atoms");
  const double inv = 1.0 / out.counted;

  if (!prediction.vectors.empty()) {
    if (static_cast<int>(prediction.vectors.size()) != n) fail("prediction size mismatch");
    out.gradient.vectors.assign(n, Eigen::Vector3d::Zero());
    for (int a = 0; a < n; ++a) {
      if (!system.predict_mask[a]) continue;
      const Eigen::Vector3d d = prediction.vectors[a] - targets[a];
      const double dist = d.norm();
      out.loss += huber(dist, delta) * inv;
      out.gradient.vectors[a] = (dist <= delta ? d : (delta / dist) * d) * inv;
    }
  } else {
    if (static_cast<int>(prediction.scalars.size()) != n) fail("prediction size mismatch");
    out.gradient.scalars.assign(n, 0.0);
    for (int a = 0; a < n; ++a) {
      if (!system.predict_mask[a]) continue;
      const double d = prediction.scalars[a] - targets[a].norm();
      const double dist = std::abs(d);
      out.loss += huber(dist, delta) * inv;
      out.gradient.scalars[a] = (dist <= delta ? d : (d > 0 ? delta : -delta)) * inv;
    }
  }
  return out;
}

}  // namespace tfk

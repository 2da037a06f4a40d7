#pragma once

#include <random>

#include <Eigen/Dense>

#include "tfk/geometry.hpp"

namespace testing {

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
}

inline tfk::Positions random_points(std::mt19937_64& rng, int n, double scale = 5.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  tfk::Positions p(n);
  for (auto& x : p) x = Eigen::Vector3d(u(rng), u(rng), u(rng));
  return p;
}

// Rotation from a unit quaternion built directly, independent of the library sampler.
inline Eigen::Matrix3d quaternion_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

}  // namespace testing

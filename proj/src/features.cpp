#include "tfk/features.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "tfk/error.hpp"

namespace tfk {

FeatureMap::FeatureMap(int atoms, const Channels& channels) : atoms_(atoms), channels_(channels) {
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (channels[l] < 0) fail("negative channel count");
    data_[l].assign(static_cast<std::size_t>(atoms) * channels[l] * order_dim(l), 0.0);
  }
}

void FeatureMap::set_zero() {
  for (auto& d : data_) std::fill(d.begin(), d.end(), 0.0);
}

bool FeatureMap::all_finite() const {
  for (const auto& d : data_)
    for (double v : d)
      if (!std::isfinite(v)) return false;
  return true;
}

double FeatureMap::max_abs() const {
  double m = 0.0;
  for (const auto& d : data_)
    for (double v : d) m = std::max(m, std::abs(v));
  return m;
}

FeatureMap& FeatureMap::operator+=(const FeatureMap& other) {
  if (other.atoms_ != atoms_ || other.channels_ != channels_) fail("feature map shape mismatch");
  for (int l = 0; l <= kMaxOrder; ++l)
    for (std::size_t i = 0; i < data_[l].size(); ++i) data_[l][i] += other.data_[l][i];
  return *this;
}

FeatureMap rotate_features(const FeatureMap& f, const Rotation& g) {
  FeatureMap out(f.atoms(), f.channels());
  for (int l = 0; l <= kMaxOrder; ++l) {
    if (!f.has(l)) continue;
    const Eigen::MatrixXd d = wigner_matrix(l, g);
    const int dim = order_dim(l);
    const auto in = f.order(l);
    auto o = out.order(l);
    for (std::size_t base = 0; base < in.size(); base += dim) {
      Eigen::Map<const Eigen::VectorXd> v(in.data() + base, dim);
      Eigen::Map<Eigen::VectorXd>(o.data() + base, dim) = d * v;
    }
  }
  return out;
}

double max_abs_difference(const FeatureMap& a, const FeatureMap& b) {
  if (a.atoms() != b.atoms() || a.channels() != b.channels()) fail("feature map shape mismatch");
  double m = 0.0;
  for (int l = 0; l <= kMaxOrder; ++l) {
    const auto x = a.order(l), y = b.order(l);
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

}  // namespace tfk

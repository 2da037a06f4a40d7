#pragma once

#include <array>
#include <span>
#include <vector>

#include "tfk/so3.hpp"

namespace tfk {

/// Channel count per rotation order; 0 means the order is absent.
using Channels = std::array<int, kMaxOrder + 1>;

/// Per-atom equivariant features. Order l holds a contiguous
/// [atom][channel][m] block of 2l+1 components per channel.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int atoms, const Channels& channels);

  int atoms() const { return atoms_; }
  const Channels& channels() const { return channels_; }
  int channels(int l) const { return channels_[l]; }
  bool has(int l) const { return channels_[l] > 0; }

  std::span<double> order(int l) { return data_[l]; }
  std::span<const double> order(int l) const { return data_[l]; }

  double* at(int atom, int l, int c) {
    return data_[l].data() + (static_cast<std::size_t>(atom) * channels_[l] + c) * order_dim(l);
  }
  const double* at(int atom, int l, int c) const {
    return data_[l].data() + (static_cast<std::size_t>(atom) * channels_[l] + c) * order_dim(l);
  }

  void set_zero();
  bool all_finite() const;
  double max_abs() const;
  FeatureMap& operator+=(const FeatureMap& other);

 private:
  int atoms_ = 0;
  Channels channels_{};
  std::array<std::vector<double>, kMaxOrder + 1> data_;
};

/// Applies D^l(g) to every order-l channel.
FeatureMap rotate_features(const FeatureMap& f, const Rotation& g);

/// Largest absolute elementwise difference; shapes must match.
double max_abs_difference(const FeatureMap& a, const FeatureMap& b);

}  // namespace tfk

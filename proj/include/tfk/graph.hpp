#pragma once

#include <vector>

#include "tfk/structure.hpp"

namespace tfk {

/// Gaussian bumps exp(-(r - mu_b)^2 / (2 s^2)) with centers evenly spaced on
/// [0, cutoff] and s equal to the center spacing.
struct RadialBasis {
  int size = 12;
  double cutoff = 12.0;

  double center(int b) const { return size > 1 ? cutoff * b / (size - 1) : 0.0; }
  double width() const { return size > 1 ? cutoff / (size - 1) : cutoff; }
  void evaluate(double r, double* out) const;
};

std::vector<double> radial_basis(double r, const RadialBasis& basis = {});

/// Per-system neighborhood structure shared by all convolutions of one
/// forward pass: CSR neighbor lists plus per-edge geometry.
struct SystemGraph {
  int atoms = 0;
  int lmax = 0;
  int basis_size = 0;
  std::vector<int> element_index;
  std::vector<int> offsets;    // atoms + 1
  std::vector<int> neighbor;   // per edge
  std::vector<double> distance;
  std::vector<double> harmonics;  // per edge, (lmax + 1)^2 packed orders
  std::vector<double> basis;      // per edge, basis_size values

  int edges() const { return static_cast<int>(neighbor.size()); }
  const double* edge_harmonics(int e) const { return harmonics.data() + static_cast<std::size_t>(e) * (lmax + 1) * (lmax + 1); }
  const double* edge_basis(int e) const { return basis.data() + static_cast<std::size_t>(e) * basis_size; }
};

/// Edges a -> n for the k nearest neighbors n of each atom a, with relative
/// vector position_n - position_a.
SystemGraph build_graph(const AtomSystem& system, std::vector<int> element_index, int k, int lmax,
                        const RadialBasis& basis);

}  // namespace tfk

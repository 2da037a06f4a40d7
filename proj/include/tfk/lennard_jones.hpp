#pragma once

#include <span>
#include <string>

#include "tfk/geometry.hpp"

namespace tfk {

/// Pair potential parameters. Energies in meV, lengths in Angstrom, forces
/// in meV/Angstrom.
struct LJParams {
  double epsilon = 10.0;
  double sigma = 3.0;
  double cutoff = 9.0;

  void validate() const;
};

/// Per-element multipliers applied to epsilon and sigma before
/// Lorentz-Berthelot mixing.
struct LJSpecies {
  double epsilon_scale = 1.0;
  double sigma_scale = 1.0;
};

/// Fixed mixing table for C, H, O, N, S and P. Throws for other elements.
LJSpecies lj_species(const std::string& element);

/// Truncated (not shifted) Lennard-Jones forces for identical particles:
/// F_i = sum_{j != i, r_ij < cutoff} 24 eps / r (2 (s/r)^12 - (s/r)^6) r_hat_ij,
/// with r_hat_ij pointing from j to i. Throws on coincident points.
Positions lj_forces(PointSpan positions, const LJParams& params);
double lj_energy(PointSpan positions, const LJParams& params);

/// Same with per-atom element parameters, mixed as sigma_ij = (s_i + s_j) / 2 and
/// eps_ij = sqrt(e_i e_j). The cutoff is not scaled.
Positions lj_forces(PointSpan positions, std::span<const std::string> elements, const LJParams& params);
double lj_energy(PointSpan positions, std::span<const std::string> elements, const LJParams& params);

}  // namespace tfk

#pragma once

#include <cstdint>
#include <vector>

#include "tfk/structure.hpp"

namespace tfk {

/// Candidate and native structures in 1:1 correspondence by index.
struct StructurePair {
  AtomSystem candidate;
  AtomSystem target;

  void validate() const;
};

struct RefinementField {
  Positions vectors;                  // Angstrom, candidate frame
  std::vector<std::uint8_t> degenerate;
};

/// Structure refinement vector field. For each atom a:
///   N_a  = k nearest candidate atoms (a excluded),
///   T_a  = Kabsch(native[N_a] -> candidate[N_a]),
///   v_a  = p_a^c - T_a(p_a^t).
/// Requires k >= 3 and at least 4 atoms so every neighborhood has 3 points.
RefinementField refinement_field(const StructurePair& pair, int k = 50);

/// positions - step * vectors.
AtomSystem apply_refinement(const AtomSystem& candidate, const Positions& vectors, double step);

/// Mean |v_a| of the exact field between candidate and native.
double mean_local_deviation(const StructurePair& pair, int k = 50);

struct RefinementExample {
  StructurePair pair;  // pair.candidate carries the field as targets; degenerate atoms masked out
};

/// Candidates = native + N(0, noise^2) per coordinate, then a random global
/// rigid motion. Example j of native i depends only on (seed, i, j).
std::vector<RefinementExample> make_refinement_dataset(const std::vector<AtomSystem>& natives, double noise,
                                                       int candidates_per_target, std::uint64_t seed, int k = 50);

}  // namespace tfk

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfk/lennard_jones.hpp"
#include "tfk/structure.hpp"

namespace tfk {

inline const std::vector<std::string> kProteinVocabulary = {"C", "H", "O", "N", "S"};
inline const std::vector<std::string> kNucleicVocabulary = {"C", "H", "O", "N", "P"};

struct LJClusterSettings {
  int n_systems = 200;
  int atoms_per_system = 30;
  double box = 12.0;  // cube edge, Angstrom
  LJParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary = kProteinVocabulary;
  /// Fraction of atoms per system marked predict_mask = false.
  double solvent_fraction = 0.0;
  /// Minimum pair distance as a multiple of the mixed sigma.
  double min_distance_factor = 0.8;
  int max_attempts = 2000;
};

/// Random clusters in a cube with mixed-element LJ force targets (meV/A).
/// System i depends only on (seed, i).
std::vector<AtomSystem> generate_lj_clusters(const LJClusterSettings& settings);

/// Point masses with Newtonian acceleration targets in natural units. Masses
/// are carried by the element label: vocabulary index + 1.
std::vector<AtomSystem> gravity_toy(int n_systems, int n_points, std::uint64_t seed,
                                    const std::vector<std::string>& vocabulary = kProteinVocabulary);

/// a_i = sum_{j != i} m_j (x_j - x_i) / |x_j - x_i|^3. Throws on coincident points.
Positions gravity_accelerations(PointSpan positions, std::span<const double> masses);

struct ChainSettings {
  int n_structures = 21;
  int atoms_per_structure = 40;
  std::uint64_t seed = 0;
  double bond_length = 1.5;
  double bond_angle_deg = 112.0;
  double min_nonbonded = 2.6;
};

/// Self-avoiding backbone-like chains with fixed bond geometry and a
/// repeating element pattern, used as ground-truth structures for the
/// refinement task.
std::vector<AtomSystem> generate_chain_structures(const ChainSettings& settings);

}  // namespace tfk

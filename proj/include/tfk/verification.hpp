#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfk/model.hpp"
#include "tfk/refinement.hpp"

namespace tfk {

/// Random system of `atoms` atoms uniformly placed in a cube of edge `box`
/// with elements drawn from `vocabulary`; no two atoms closer than 0.5 A.
AtomSystem random_system(int atoms, double box, const std::vector<std::string>& vocabulary, std::uint64_t seed);

struct LayerDeviation {
  std::string layer;
  std::string kind;
  double max_relative_deviation = 0.0;
};

/// Each layer run on rotated inputs and rotated geometry versus rotating
/// its output: max |L(D x, g) - D L(x)| / (max |L(x)| + 1e-12) per layer.
std::vector<LayerDeviation> layer_equivariance(const Model& model, const AtomSystem& system, int rotations,
                                               std::uint64_t seed);

/// Vector models: max over rotations and atoms of
/// |g f(x) - f(g x)| / (|f(x)| + 1e-12). Scalar models: max |f(g x) - f(x)|.
double end_to_end_equivariance(const Model& model, const AtomSystem& system, int rotations, std::uint64_t seed);

/// Max absolute output change under random translations with components in
/// [-max_shift, max_shift].
double translation_deviation(const Model& model, const AtomSystem& system, int translations, double max_shift,
                             std::uint64_t seed);

/// Structure refinement field computed without the library's neighbor search
/// or Kabsch: exhaustive sort and the quaternion (Horn) superposition.
Positions reference_refinement_field(const StructurePair& pair, int k);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, LayerDeviation>> layers;  // (model tag, deviation)
  bool passed() const;
};

struct VerificationSettings {
  int systems = 2;
  int rotations = 10;
  int atoms = 60;
  std::uint64_t seed = 0;
  bool inject_fault = false;
};

/// Settings for a named level: "quick" or "full".
VerificationSettings verification_level(const std::string& level);

/// SO(3) algebra, Kabsch, refinement-field, per-layer and end-to-end
/// equivariance, invariance and gradient checks.
VerificationReport run_verification(const VerificationSettings& settings);

}  // namespace tfk

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tfk/geometry.hpp"

namespace tfk {

/// A set of atoms with optional per-atom vector targets.
///
/// Only atoms with predict_mask set contribute to losses and metrics; the
/// rest still shape everyone else's neighborhoods.
struct AtomSystem {
  std::string identifier;
  Positions positions;
  std::vector<std::string> elements;
  std::vector<std::uint8_t> predict_mask;
  std::optional<Positions> targets;

  int size() const { return static_cast<int>(positions.size()); }
  int masked_count() const;

  /// Throws on any violated invariant.
  void validate() const;
};

/// Builds a system with every atom masked in.
AtomSystem make_system(std::string identifier, Positions positions, std::vector<std::string> elements);

/// Canonical element spelling: first letter upper case, rest lower case.
std::string normalize_element(std::string_view symbol);

/// Rotates positions (and targets) about the origin, then translates positions.
AtomSystem transformed(const AtomSystem& system, const RigidTransform& t);

}  // namespace tfk

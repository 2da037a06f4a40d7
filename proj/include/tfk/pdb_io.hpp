#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tfk/structure.hpp"

namespace tfk {

/// Reads ATOM/HETATM records of the fixed-width PDB layout:
/// x, y, z from columns 31-54 (three 8-wide fields) and the element from
/// columns 77-78. Solvent HETATM records (HOH, WAT, ...) are masked out.
/// When the element columns are blank the symbol is taken from the atom
/// name (columns 13-16) and a warning is appended to `warnings`.
AtomSystem parse_structure(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Writes ATOM records for masked-in atoms and HETATM HOH records for the
/// rest. Throws when a coordinate does not fit its 8.3 field.
std::string write_structure(const AtomSystem& system);

AtomSystem read_structure_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_structure_file(const std::string& path, const AtomSystem& system);

}  // namespace tfk

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tfk/structure.hpp"

namespace tfk {

/// One manifest line: "<path> <split>", path relative to the manifest.
struct ManifestEntry {
  std::string path;
  std::string split;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries);

/// Writes `<dir>/<identifier>.pdb` and, when targets are present,
/// `<dir>/<identifier>.vec.csv`. Returns the structure path relative to `root`.
std::string write_system(const std::filesystem::path& root, const std::string& subdir, const AtomSystem& system);

/// Reads a structure and its sibling `.vec.csv` targets when present. Atoms
/// flagged in the target file are masked out.
AtomSystem read_system(const std::filesystem::path& structure_path);

/// All systems of one split ("train", "val", "test"), in manifest order.
std::vector<AtomSystem> load_split(const std::filesystem::path& manifest, const std::string& split);

/// Rounds positions to the 3-decimal precision of the structure format.
void round_to_format(AtomSystem& system);

}  // namespace tfk

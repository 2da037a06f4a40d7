#include "tfk/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tfk/error.hpp"
#include "tfk/pdb_io.hpp"
#include "tfk/vector_io.hpp"

namespace tfk {

namespace fs = std::filesystem;

std::vector<ManifestEntry> read_manifest(const fs::path& manifest) {
  std::ifstream f(manifest);
  if (!f) fail("cannot read manifest '" + manifest.string() + "'");
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string extra;
    if (!(ss >> e.path >> e.split) || (ss >> extra)) {
      fail("manifest line " + std::to_string(lineno) + ": expected '<path> <split>'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const fs::path& manifest, const std::vector<ManifestEntry>& entries) {
  std::ofstream f(manifest, std::ios::binary);
  if (!f) fail("cannot write manifest '" + manifest.string() + "'");
  for (const auto& e : entries) f << e.path << ' ' << e.split << '\n';
}

std::string write_system(const fs::path& root, const std::string& subdir, const AtomSystem& system) {
  const fs::path dir = root / subdir;
  fs::create_directories(dir);
  const std::string stem = system.identifier;
  write_structure_file((dir / (stem + ".pdb")).string(), system);
  if (system.targets) {
    VectorTable t;
    t.elements = system.elements;
    t.vectors = *system.targets;
    t.flags.resize(system.size());
    for (int i = 0; i < system.size(); ++i) t.flags[i] = system.predict_mask[i] ? 0 : 1;
    write_vector_file((dir / (stem + ".vec.csv")).string(), t);
  }
  return (fs::path(subdir) / (stem + ".pdb")).generic_string();
}

AtomSystem read_system(const fs::path& structure_path) {
  AtomSystem s = read_structure_file(structure_path.string());
  s.identifier = structure_path.stem().string();
  fs::path vec = structure_path;
  vec.replace_extension(".vec.csv");
  if (fs::exists(vec)) {
    const VectorTable t = read_vector_file(vec.string());
    if (static_cast<int>(t.vectors.size()) != s.size()) fail("target file '" + vec.string() + "' has wrong atom count");
    for (int i = 0; i < s.size(); ++i) {
      if (t.elements[i] != s.elements[i]) fail("target file '" + vec.string() + "' element mismatch");
      if (t.flags[i]) s.predict_mask[i] = 0;
    }
    s.targets = t.vectors;
  }
  s.validate();
  return s;
}

std::vector<AtomSystem> load_split(const fs::path& manifest, const std::string& split) {
  const fs::path base = manifest.parent_path();
  std::vector<AtomSystem> out;
  for (const auto& e : read_manifest(manifest)) {
    if (e.split == split) out.push_back(read_system(base / e.path));
  }
  return out;
}

void round_to_format(AtomSystem& system) {
  for (auto& p : system.positions) {
    for (int d = 0; d < 3; ++d) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f", p[d]);
      p[d] = std::strtod(buf, nullptr);
    }
  }
}

}  // namespace tfk

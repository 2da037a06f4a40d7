#include "tfk/pdb_io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tfk/error.hpp"

namespace tfk {

namespace {

constexpr std::array<std::string_view, 6> kSolventResidues = {"HOH", "WAT", "SOL", "DOD", "H2O", "TIP"};

// 1-based inclusive column range, clipped to the line.
std::string_view columns(std::string_view line, std::size_t first, std::size_t last) {
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_coordinate(std::string_view field, int line_no, const char* axis) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail("line " + std::to_string(line_no) + ": malformed " + axis + " coordinate '" + std::string(field) + "'");
  }
  return value;
}

std::string element_from_atom_name(std::string_view name) {
  // Columns 13-14 hold a right-justified element; a leading blank or digit
  // means a one-letter symbol in column 14.
  std::string out;
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(c);
      break;
    }
  }
  return normalize_element(out);
}

std::string format_field(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%8.3f", value);
  return buf;
}

}  // namespace

AtomSystem parse_structure(std::string_view text, std::vector<std::string>* warnings) {
  AtomSystem system;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    const std::string_view record = columns(line, 1, 6);
    const bool is_atom = record == "ATOM  " || trim(record) == "ATOM";
    const bool is_het = trim(record) == "HETATM";
    if (!is_atom && !is_het) continue;
    if (line.size() < 54) fail("line " + std::to_string(line_no) + ": truncated coordinate record");

    const Eigen::Vector3d xyz(parse_coordinate(columns(line, 31, 38), line_no, "x"),
                              parse_coordinate(columns(line, 39, 46), line_no, "y"),
                              parse_coordinate(columns(line, 47, 54), line_no, "z"));

    std::string element = normalize_element(trim(columns(line, 77, 78)));
    if (element.empty()) {
      element = element_from_atom_name(columns(line, 13, 16));
      if (element.empty()) fail("line " + std::to_string(line_no) + ": no element symbol");
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) + ": element columns blank, using '" + element +
                            "' from atom name");
      }
    }

    bool solvent = false;
    if (is_het) {
      const std::string_view res = trim(columns(line, 18, 20));
      for (auto s : kSolventResidues) solvent = solvent || res == s;
    }

    system.positions.push_back(xyz);
    system.elements.push_back(std::move(element));
    system.predict_mask.push_back(solvent ? 0 : 1);
  }
  if (system.positions.empty()) fail("no atom records");
  return system;
}

std::string write_structure(const AtomSystem& system) {
  system.validate();
  std::ostringstream out;
  for (int i = 0; i < system.size(); ++i) {
    const auto& p = system.positions[i];
    std::array<std::string, 3> fields;
    for (int d = 0; d < 3; ++d) {
      fields[d] = format_field(p[d]);
      if (fields[d].size() != 8) fail("coordinate " + fields[d] + " of atom " + std::to_string(i) + " overflows its field");
    }
    const std::string& element = system.elements[i];
    if (element.size() > 2) fail("element symbol '" + element + "' longer than two characters");
    const bool solvent = !system.predict_mask[i];
    char name[5];
    std::snprintf(name, sizeof(name), element.size() == 1 ? " %-3s" : "%-4s", element.c_str());
    char upper[3] = {0, 0, 0};
    for (std::size_t c = 0; c < element.size(); ++c) upper[c] = static_cast<char>(std::toupper(element[c]));
    char line[96];
    std::snprintf(line, sizeof(line), "%-6s%5d %-4s %3s %c%4d    %s%s%s%6.2f%6.2f          %2s\n",
                  solvent ? "HETATM" : "ATOM", (i + 1) % 100000, name, solvent ? "HOH" : "UNK", 'A',
                  (i + 1) % 10000, fields[0].c_str(), fields[1].c_str(), fields[2].c_str(), 1.0, 0.0, upper);
    out << line;
  }
  out << "END\n";
  return out.str();
}

AtomSystem read_structure_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open structure file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  AtomSystem s = parse_structure(buf.str(), warnings);
  s.identifier = path;
  return s;
}

void write_structure_file(const std::string& path, const AtomSystem& system) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write structure file '" + path + "'");
  out << write_structure(system);
}

}  // namespace tfk

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tfk/geometry.hpp"

namespace tfk {

/// Per-atom vectors with a flag column, as stored in field/target CSV files:
/// `index,element,v_x,v_y,v_z,degenerate`, values at 17 significant digits.
struct VectorTable {
  std::vector<std::string> elements;
  Positions vectors;
  std::vector<std::uint8_t> flags;
};

std::string write_vector_csv(const VectorTable& table);
VectorTable parse_vector_csv(std::string_view text);

void write_vector_file(const std::string& path, const VectorTable& table);
VectorTable read_vector_file(const std::string& path);

/// Shortest-safe round-trip formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace tfk

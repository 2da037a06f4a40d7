#include "tfk/vector_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tfk/error.hpp"

namespace tfk {

namespace {

constexpr std::string_view kHeader = "index,element,v_x,v_y,v_z,degenerate";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double to_double(std::string_view s, int line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail("vector file line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string write_vector_csv(const VectorTable& table) {
  const std::size_t n = table.vectors.size();
  if (table.elements.size() != n || table.flags.size() != n) fail("vector table columns differ in length");
  std::ostringstream out;
  out << kHeader << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = table.vectors[i];
    out << i << ',' << table.elements[i] << ',' << format_double(v.x()) << ',' << format_double(v.y()) << ','
        << format_double(v.z()) << ',' << (table.flags[i] ? 1 : 0) << '\n';
  }
  return out.str();
}

VectorTable parse_vector_csv(std::string_view text) {
  VectorTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kHeader) fail("vector file: unexpected header '" + line + "'");
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 6) fail("vector file line " + std::to_string(line_no) + ": expected 6 columns");
    if (static_cast<std::size_t>(to_double(cols[0], line_no)) != table.vectors.size()) {
      fail("vector file line " + std::to_string(line_no) + ": indices must be consecutive from 0");
    }
    table.elements.emplace_back(cols[1]);
    table.vectors.emplace_back(to_double(cols[2], line_no), to_double(cols[3], line_no), to_double(cols[4], line_no));
    table.flags.push_back(to_double(cols[5], line_no) != 0.0 ? 1 : 0);
  }
  return table;
}

void write_vector_file(const std::string& path, const VectorTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write vector file '" + path + "'");
  out << write_vector_csv(table);
}

VectorTable read_vector_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open vector file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_vector_csv(buf.str());
}

}  // namespace tfk

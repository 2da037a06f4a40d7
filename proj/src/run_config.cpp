#include "tfk/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tfk/error.hpp"

namespace tfk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
  static const std::map<std::string, std::string> d = {
      {"task", "forces"},
      {"lmax", "1"},
      {"delta", ""},
      {"lr", "0.1"},
      {"optimizer", "sgd"},
      {"batches", "5000"},
      {"validation_interval", "250"},
      {"seed", "0"},
      {"replicates", "1"},
      {"k", "50"},
      {"out", "out"},
      {"data", ""},
      {"systems", "200"},
      {"atoms", "30"},
      {"box", "12"},
      {"solvent_fraction", "0"},
      {"noise", "0.5"},
      {"candidates", "4"},
      {"checkpoint", ""},
      {"resume", ""},
      {"split", "test"},
      {"candidate", ""},
      {"target", ""},
      {"step", "0.5"},
      {"level", "quick"},
      {"inject_fault", "false"},
  };
  return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().count(key)) fail("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!defaults().count(key)) fail(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    set(key, trim(line.substr(eq + 1)));
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  load_text(ss.str(), path.string());
}

void RunConfig::load_environment() {
  for (const auto& [key, _] : defaults()) {
    std::string name = "TFK_" + key;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(name.c_str())) set(key, v);
  }
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail("unknown configuration key '" + key + "'");
  return it->second;
}

int RunConfig::integer(const std::string& key) const {
  const std::string v = str(key);
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail("'" + key + "' must be an integer, got '" + v + "'");
  return out;
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const std::string v = str(key);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    fail("'" + key + "' must be a non-negative integer, got '" + v + "'");
  }
  return out;
}

double RunConfig::real(const std::string& key) const {
  const std::string v = str(key);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) fail("'" + key + "' must be a number, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string v = str(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off" || v.empty()) return false;
  fail("'" + key + "' must be a boolean, got '" + v + "'");
}

double RunConfig::delta() const {
  if (!str("delta").empty()) return real("delta");
  const std::string task = str("task");
  if (task == "forces") return 10.0;  // meV/A
  return 1.0;                         // A for refinement, natural units for gravity
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace tfk

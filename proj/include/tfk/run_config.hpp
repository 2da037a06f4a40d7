#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tfk {

/// Flat key-value run configuration. Sources are layered:
/// built-in defaults < config file < TFK_* environment < command-line flags.
class RunConfig {
 public:
  /// Every recognized key with its default value.
  static const std::map<std::string, std::string>& defaults();

  RunConfig();

  /// `key = value` lines; '#' starts a comment. Unknown keys are errors.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& origin = "config");
  /// TFK_<KEY> (upper case) for every known key.
  void load_environment();
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string str(const std::string& key) const;
  int integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// Task-specific default applied when the key was never set explicitly.
  double delta() const;

  /// Canonical `key = value` listing.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace tfk

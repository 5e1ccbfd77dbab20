#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mfsmd {

/// Flat dotted-key configuration ("section.key = value" lines, '#' comments).
/// Only keys present in the defaults table are accepted.
class Config {
 public:
  /// Every known key with its default value.
  static Config defaults();

  /// Merges a file on top of the current values.
  void load_file(const std::filesystem::path& path);
  void merge_text(const std::string& text, const std::string& origin);
  /// "--section.key value" and "--section.key=value" pairs.
  void apply_overrides(const std::vector<std::string>& args);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;  // integer >= 0
  std::uint64_t seed(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  std::vector<std::size_t> count_list(const std::string& key) const;
  /// Value restricted to one of `choices`.
  const std::string& choice(const std::string& key,
                            const std::vector<std::string>& choices) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Canonical "key = value" dump, sorted by key.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Environment variable naming a config file loaded when --config is absent.
inline constexpr const char* kConfigEnvVar = "MFSMD_CONFIG";

}  // namespace mfsmd

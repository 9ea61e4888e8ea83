#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wakefar/bvp.hpp"
#include "wakefar/march.hpp"
#include "wakefar/model.hpp"

namespace wakefar {

enum class KeyKind { number, integer, text, boolean };

struct KeySpec {
  std::string key;
  KeyKind kind;
  std::string help;
};

/// Every key the configuration file and the command line understand. A
/// flag is the key with underscores turned into dashes.
const std::vector<KeySpec>& config_keys();

/// Flat key = value settings. Values stay text until read so that flags and
/// file entries share one path.
class RunConfig {
 public:
  /// Parses `key = value` lines; `#` starts a comment. ConfigError naming
  /// the key for unknown keys, ParseError (with the line) for malformed
  /// lines.
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  /// Later values win. ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  bool boolean(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Constants with overrides applied. Invariant violations surface as
/// ConfigError naming the key.
ModelConstants constants_from(const RunConfig& c);
ShootingSpec shooting_from(const RunConfig& c, const ModelConstants& k);
CollocationSpec collocation_from(const RunConfig& c, const ShootingSpec& s);
MarchConfig march_from(const RunConfig& c);

}  // namespace wakefar

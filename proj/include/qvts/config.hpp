#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvts/gridworld.hpp"
#include "qvts/simulator.hpp"
#include "qvts/solvers.hpp"

namespace qvts {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat `key = value` file. '#' starts a comment; blank lines are skipped.
/// Later assignments override earlier ones.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text);
  static ConfigFile load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Everything a solve / simulate run needs.
struct RunConfig {
  std::string map_path;
  GridModelParams model;
  SolverConfig solver;
  BatchConfig batch;
  std::string output_dir = "out";
  /// Defaults to <output_dir>/cache.
  std::string cache_dir;

  std::string resolved_cache_dir() const;
};

/// Names accepted by to_run_config.
const std::vector<std::string>& config_keys();

/// Applies every key on top of the defaults. Unknown keys and unparsable
/// values raise ConfigError.
RunConfig to_run_config(const ConfigFile& file);

}  // namespace qvts

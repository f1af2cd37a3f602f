#include "qvts/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace qvts {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("bad value for '" + key + "': '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&](const char* key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = parse_number<double>(k, v);
      };
    };
    auto count = [&](const char* key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = parse_number<std::size_t>(k, v);
      };
    };
    auto seed = [&](const char* key, auto member) {
      t[key] = [member](RunConfig& c, const std::string& k, const std::string& v) {
        member(c) = parse_number<std::uint64_t>(k, v);
      };
    };
    t["map"] = [](RunConfig& c, const std::string&, const std::string& v) { c.map_path = v; };
    t["output_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; };
    t["cache_dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.cache_dir = v; };
    t["planners"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.batch.planners.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const std::string_view name = trim(item);
        if (!name.empty()) c.batch.planners.push_back(parse_planner(name));
      }
      if (c.batch.planners.empty()) throw ConfigError("planners list is empty");
    };
    real("discount", [](RunConfig& c) -> double& { return c.model.discount; });
    real("p_intended", [](RunConfig& c) -> double& { return c.model.noise.p_intended; });
    real("p_stay", [](RunConfig& c) -> double& { return c.model.noise.p_stay; });
    real("p_lateral", [](RunConfig& c) -> double& { return c.model.noise.p_lateral; });
    real("sensor_accuracy", [](RunConfig& c) -> double& { return c.model.sensor_accuracy; });
    real("epsilon", [](RunConfig& c) -> double& { return c.solver.epsilon; });
    count("max_iterations", [](RunConfig& c) -> std::size_t& { return c.solver.max_iterations; });
    count("pbvi_sweeps", [](RunConfig& c) -> std::size_t& { return c.solver.pbvi_sweeps; });
    count("pbvi_target_size", [](RunConfig& c) -> std::size_t& { return c.solver.pbvi_target_size; });
    seed("solver_seed", [](RunConfig& c) -> std::uint64_t& { return c.solver.rng_seed; });
    count("episodes", [](RunConfig& c) -> std::size_t& { return c.batch.episodes; });
    seed("seed_base", [](RunConfig& c) -> std::uint64_t& { return c.batch.seed_base; });
    count("max_steps", [](RunConfig& c) -> std::size_t& { return c.batch.limits.max_steps; });
    count("stop_patience", [](RunConfig& c) -> std::size_t& { return c.batch.limits.stop_patience; });
    count("threads", [](RunConfig& c) -> std::size_t& { return c.batch.threads; });
    count("samples_per_qnode", [](RunConfig& c) -> std::size_t& { return c.batch.planner_options.tree.samples_per_qnode; });
    real("time_budget_ms", [](RunConfig& c) -> double& { return c.batch.planner_options.tree.time_budget_ms; });
    real("gap_tolerance", [](RunConfig& c) -> double& { return c.batch.planner_options.tree.gap_tolerance; });
    count("node_cap", [](RunConfig& c) -> std::size_t& { return c.batch.planner_options.tree.node_cap; });
    count("max_expansions", [](RunConfig& c) -> std::size_t& { return c.batch.planner_options.tree.max_expansions; });
    seed("seed", [](RunConfig& c) -> std::uint64_t& { return c.batch.planner_options.tree.seed; });
    t["action_rule"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "max_lower") {
        c.batch.planner_options.tree.action_rule = ActionRule::kMaxLower;
      } else if (v == "max_upper") {
        c.batch.planner_options.tree.action_rule = ActionRule::kMaxUpper;
      } else {
        throw ConfigError("bad value for '" + k + "': '" + v + "'");
      }
    };
    t["expansion_mode"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "sample") {
        c.batch.planner_options.tree.expansion_mode = ExpansionMode::kSample;
      } else if (v == "exact") {
        c.batch.planner_options.tree.expansion_mode = ExpansionMode::kExact;
      } else {
        throw ConfigError("bad value for '" + k + "': '" + v + "'");
      }
    };
    t["astar_cache_path"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.batch.planner_options.astar_cache_path = parse_bool(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text) {
  ConfigFile out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    out.values_[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::resolved_cache_dir() const {
  return cache_dir.empty() ? output_dir + "/cache" : cache_dir;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig to_run_config(const ConfigFile& file) {
  RunConfig config;
  for (const auto& [key, value] : file.values()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second(config, key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  config.model.noise.validate();
  config.solver.validate();
  return config;
}

}  // namespace qvts

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qvts/pomdp.hpp"
#include "qvts/solvers.hpp"

namespace qvts {

inline constexpr std::uint8_t kCacheFormatVersion = 1;

/// Digest of the model tables and every solver setting that affects output.
std::uint64_t solver_cache_key(const PomdpModel& model, const SolverConfig& config);

/// File names inside a cache directory.
struct CachePaths {
  explicit CachePaths(const std::string& dir);
  std::string fib;
  std::string pbvi;
  std::string beliefs;
  std::string mdp;
};

// Each loader returns nullopt when the file is missing, truncated, from another
// format version, or written under a different key or state count; callers
// then re-solve.

void save_alpha_set(const std::string& path, std::uint64_t key,
                    const AlphaSet& set, bool converged = true);
std::optional<AlphaSet> load_alpha_set(const std::string& path,
                                       std::uint64_t key,
                                       std::size_t num_states,
                                       bool* converged = nullptr);

void save_beliefs(const std::string& path, std::uint64_t key,
                  const std::vector<Belief>& beliefs);
std::optional<std::vector<Belief>> load_beliefs(const std::string& path,
                                                std::uint64_t key,
                                                std::size_t num_states);

void save_mdp(const std::string& path, std::uint64_t key,
              const MdpSolution& mdp);
std::optional<MdpSolution> load_mdp(const std::string& path, std::uint64_t key,
                                    std::size_t num_states);

}  // namespace qvts

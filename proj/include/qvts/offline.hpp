#pragma once

#include <string>

#include "qvts/simulator.hpp"
#include "qvts/solvers.hpp"

namespace qvts {

class MissingPrerequisite : public Error {
 public:
  using Error::Error;
};

struct SolveReport {
  bool fib_cached = false;
  bool pbvi_cached = false;
  bool beliefs_cached = false;
  bool mdp_cached = false;
  std::size_t fib_iterations = 0;
  bool fib_converged = true;
  std::size_t belief_points = 0;
  std::size_t pbvi_vectors = 0;
  std::size_t mdp_iterations = 0;
  bool mdp_converged = true;
  double upper_at_b0 = 0.0;
  double lower_at_b0 = 0.0;
  double seconds = 0.0;

  bool converged() const { return fib_converged && mdp_converged; }
};

/// Runs FIB, belief-set expansion, PBVI and MDP value iteration for the
/// scenario, reusing cache files in `cache_dir` whose key matches. With
/// allow_solve false a missing or stale cache raises MissingPrerequisite.
/// An empty cache_dir disables caching.
OfflineSolution load_or_solve(const Scenario& scenario,
                              const SolverConfig& config,
                              const std::string& cache_dir, bool allow_solve,
                              SolveReport* report = nullptr);

}  // namespace qvts

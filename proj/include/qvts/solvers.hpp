#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qvts/pomdp.hpp"
#include "qvts/random.hpp"

namespace qvts {

struct SolverConfig {
  /// Sup-norm change below which FIB and MDP value iteration stop.
  double epsilon = 1e-4;
  /// Sweep cap for FIB and MDP value iteration.
  std::size_t max_iterations = 500;
  /// PBVI has no convergence test; it always runs this many sweeps.
  std::size_t pbvi_sweeps = 100;
  std::size_t pbvi_target_size = 128;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Called after every sweep with the sweep number (1-based) and the iterate.
using SweepObserver = std::function<void(std::size_t, const AlphaSet&)>;

struct FibResult {
  AlphaSet alphas;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Fast Informed Bound: one alpha-vector per action, iterated from the
/// constant R_max / (1 - gamma); every sweep is an upper bound. Stops
/// when the sup-norm change drops below epsilon; `converged` is false when
/// max_iterations ran out first.
FibResult solve_fib(const PomdpModel& model, const SolverConfig& config,
                    const SweepObserver& observer = {});

/// Blind lower bound: a single constant vector R_min / (1 - gamma).
AlphaSet blind_lower_bound(const PomdpModel& model);

/// Point-based Bellman backup of `set` at belief b: the best one-step
/// lookahead vector, ties by lowest action and lowest vector index.
AlphaVector point_backup(const PomdpModel& model, const AlphaSet& set,
                         const Belief& b);

/// PBVI over a fixed belief set containing b0. Each sweep replaces the set
/// with one backed-up vector per belief point.
AlphaSet solve_pbvi(const PomdpModel& model, std::span<const Belief> beliefs,
                    const SolverConfig& config,
                    const SweepObserver& observer = {});

/// One round of greedy forward expansion: every point proposes one sampled
/// successor per action and keeps the candidate farthest (L1) from the set.
std::vector<Belief> expand_belief_set(const PomdpModel& model,
                                      std::span<const Belief> current, Rng& rng);

/// Repeats expand_belief_set from {b0} until the target size is reached
/// (the result is truncated to exactly that size) or growth stalls.
std::vector<Belief> build_belief_set(const PomdpModel& model,
                                     const SolverConfig& config);

struct MdpSolution {
  std::vector<double> values;
  std::vector<ActionIndex> policy;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Value iteration on the fully observable model from the R_max / (1 - gamma)
/// start; greedy policy with ties to the lowest action.
MdpSolution solve_mdp(const PomdpModel& model, const SolverConfig& config);

/// Q*(x, a) implied by an MDP value table.
double mdp_q_value(const PomdpModel& model, std::span<const double> values,
                   StateIndex x, ActionIndex a);

class TooLarge : public Error {
 public:
  using Error::Error;
};

struct ValueInterval {
  double lower;
  double upper;
  bool contains(double v, double tol = 0.0) const {
    return v >= lower - tol && v <= upper + tol;
  }
};

inline constexpr std::size_t kExactMaxBranching = 12;
inline constexpr std::size_t kExactMaxDepth = 8;

/// Exhaustive depth-limited expansion of the Bellman recursion with zero leaf
/// value, widened by the discounted reward range of the unexplored tail. The
/// interval always contains V*(b). Throws TooLarge when |A| * |Z| > 12 or
/// depth > 8.
ValueInterval exact_value_bounded(const PomdpModel& model, const Belief& b,
                                  std::size_t depth);

/// Depth-limited value of each first action (same recursion), for tests that
/// compare planners against the enumerated optimum.
std::vector<ValueInterval> exact_action_values(const PomdpModel& model,
                                               const Belief& b,
                                               std::size_t depth);

}  // namespace qvts

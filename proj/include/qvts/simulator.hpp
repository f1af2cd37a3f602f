#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qvts/gridworld.hpp"
#include "qvts/pomdp.hpp"
#include "qvts/solvers.hpp"
#include "qvts/tree.hpp"

namespace qvts {

/// A map together with the POMDP compiled from it. The environment samples
/// motion from the unclamped kernel, so the parameters are kept alongside.
struct Scenario {
  Scenario(GridMap map_in, const GridModelParams& params_in)
      : map(std::move(map_in)),
        params(params_in),
        model(build_grid_model(map, params)) {}

  GridMap map;
  GridModelParams params;
  PomdpModel model;
};

/// Offline products shared read-only by every episode.
struct OfflineSolution {
  AlphaSet fib;
  AlphaSet pbvi;
  MdpSolution mdp;
};

enum class PlannerKind { kQvts, kAstar, kMdp };

const char* to_string(PlannerKind kind);
/// Accepts "qvts", "astar", "mdp"; throws InvalidArgument otherwise.
PlannerKind parse_planner(std::string_view name);

class Planner {
 public:
  virtual ~Planner() = default;
  /// Chooses the next action for the current filter belief.
  virtual ActionIndex act(const Belief& b, PlanStats& stats) = 0;
  /// Called after the filter moved to `posterior` on (a, z).
  virtual void observe(ActionIndex a, ObservationIndex z,
                       const Belief& posterior) = 0;
};

struct PlannerOptions {
  TreeConfig tree;
  bool astar_cache_path = false;
};

/// Fresh planner for one episode. The QVTS tree is seeded from
/// options.tree.seed and the episode seed.
std::unique_ptr<Planner> make_planner(PlannerKind kind, const Scenario& scenario,
                                      const OfflineSolution& offline,
                                      const PlannerOptions& options,
                                      std::uint64_t episode_seed);

struct EpisodeLimits {
  std::size_t max_steps = 500;
  /// Consecutive stay actions that end an episode.
  std::size_t stop_patience = 3;
};

enum class Outcome { kSuccess, kWrongStop, kStepCap, kModel };

const char* to_string(Outcome outcome);

struct StepRecord {
  /// Step index; also identifies the belief snapshot the action was chosen on.
  std::size_t step = 0;
  StateIndex state = 0;
  ActionIndex action = 0;
  /// Cell the motion noise aimed at, or -1 when it fell off the map.
  std::int64_t raw_successor = 0;
  StateIndex next_state = 0;
  ObservationIndex observation = 0;
  /// R(x_k, a_k).
  double reward = 0.0;
  bool collision = false;
  double planning_ms = 0.0;
  std::size_t expansions = 0;
};

struct EpisodeLog {
  PlannerKind planner = PlannerKind::kQvts;
  std::uint64_t seed = 0;
  StateIndex start = 0;
  std::vector<StepRecord> steps;
  Outcome outcome = Outcome::kStepCap;
  double discounted_return = 0.0;
  std::size_t collisions = 0;

  std::size_t num_steps() const { return steps.size(); }
};

/// One closed-loop run. The true start is drawn from the map's start region,
/// or from b0 when the region is empty; the filter always starts at b0.
EpisodeLog run_episode(const Scenario& scenario, Planner& planner,
                       PlannerKind kind, std::uint64_t seed,
                       const EpisodeLimits& limits);

/// sum_k gamma^k R(x_k, a_k) over the records.
double discounted_return(std::span<const StepRecord> steps, double discount);

/// Mean and sample standard deviation; std is 0 for a single value and both
/// are NaN for none.
struct Stat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

Stat describe(std::span<const double> values);

struct PlannerSummary {
  PlannerKind planner = PlannerKind::kQvts;
  std::size_t episodes = 0;
  std::size_t successes = 0;
  std::size_t wrong_stops = 0;
  std::size_t step_caps = 0;
  std::size_t model_failures = 0;
  double failure_rate = 0.0;
  // Headline numbers: reward and collisions over all episodes, steps over
  // successful ones.
  Stat reward;
  Stat collisions;
  Stat steps;
  // The other convention, kept for comparison.
  Stat reward_success;
  Stat collisions_success;
  Stat steps_all;
  double mean_planning_ms = 0.0;
};

PlannerSummary summarize(PlannerKind planner, std::span<const EpisodeLog> logs);

struct BatchConfig {
  std::vector<PlannerKind> planners{PlannerKind::kAstar, PlannerKind::kMdp,
                                    PlannerKind::kQvts};
  std::size_t episodes = 60;
  std::uint64_t seed_base = 1;
  EpisodeLimits limits;
  PlannerOptions planner_options;
  /// Worker threads; 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

struct BatchResult {
  /// logs[i] holds the episodes of config.planners[i], ordered by seed.
  std::vector<std::vector<EpisodeLog>> logs;
  std::vector<PlannerSummary> summaries;
};

/// Episode j of every planner uses seed seed_base + j.
BatchResult run_batch(const Scenario& scenario, const OfflineSolution& offline,
                      const BatchConfig& config);

// CSV output. Wall-clock timings live only in the timing file, so the other
// two are reproducible byte for byte.
void write_episode_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                       bool header = true);
void write_summary_csv(std::ostream& out,
                       std::span<const PlannerSummary> summaries);
void write_timing_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                      bool header = true);
/// Fixed-width table, one row per planner, mean +- std for reward, collisions and steps.
std::string format_summary_table(std::span<const PlannerSummary> summaries);

/// One parsed row of an episode CSV.
struct EpisodeCsvRow {
  PlannerKind planner;
  std::uint64_t seed;
  StepRecord record;
};

/// Throws InvalidArgument on malformed input.
std::vector<EpisodeCsvRow> read_episode_csv(std::istream& in);

}  // namespace qvts

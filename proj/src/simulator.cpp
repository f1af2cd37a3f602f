#include "qvts/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "qvts/baselines.hpp"

namespace qvts {

const char* to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::kQvts: return "qvts";
    case PlannerKind::kAstar: return "astar";
    case PlannerKind::kMdp: return "mdp";
  }
  return "?";
}

PlannerKind parse_planner(std::string_view name) {
  if (name == "qvts") return PlannerKind::kQvts;
  if (name == "astar") return PlannerKind::kAstar;
  if (name == "mdp") return PlannerKind::kMdp;
  throw InvalidArgument("unknown planner '" + std::string(name) + "'");
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kSuccess: return "success";
    case Outcome::kWrongStop: return "wrong_stop";
    case Outcome::kStepCap: return "step_cap";
    case Outcome::kModel: return "model";
  }
  return "?";
}

namespace {

class QvtsPlanner : public Planner {
 public:
  QvtsPlanner(const Scenario& s, const OfflineSolution& offline,
              const TreeConfig& config)
      : tree_(s.model, offline.fib, offline.pbvi, s.model.initial_belief(),
              config) {}

  ActionIndex act(const Belief&, PlanStats& stats) override {
    return tree_.plan(&stats);
  }
  void observe(ActionIndex a, ObservationIndex z, const Belief&) override {
    tree_.advance_root(a, z);
  }

 private:
  QvTree tree_;
};

class KnownStatePlanner : public Planner {
 public:
  explicit KnownStatePlanner(BaselinePlanner inner) : inner_(std::move(inner)) {}

  ActionIndex act(const Belief& b, PlanStats&) override { return inner_.act(b); }
  void observe(ActionIndex, ObservationIndex, const Belief&) override {}

 private:
  BaselinePlanner inner_;
};

}  // namespace

std::unique_ptr<Planner> make_planner(PlannerKind kind, const Scenario& scenario,
                                      const OfflineSolution& offline,
                                      const PlannerOptions& options,
                                      std::uint64_t episode_seed) {
  switch (kind) {
    case PlannerKind::kQvts: {
      TreeConfig config = options.tree;
      config.seed = derive_seed(options.tree.seed, episode_seed);
      return std::make_unique<QvtsPlanner>(scenario, offline, config);
    }
    case PlannerKind::kAstar:
      return std::make_unique<KnownStatePlanner>(
          BaselinePlanner::astar(scenario.map, options.astar_cache_path));
    case PlannerKind::kMdp:
      return std::make_unique<KnownStatePlanner>(
          BaselinePlanner::mdp(scenario.map, offline.mdp.policy));
  }
  throw InvalidArgument("unknown planner kind");
}

EpisodeLog run_episode(const Scenario& scenario, Planner& planner,
                       PlannerKind kind, std::uint64_t seed,
                       const EpisodeLimits& limits) {
  if (limits.max_steps == 0 || limits.stop_patience == 0) {
    throw InvalidArgument("max_steps and stop_patience must be positive");
  }
  const GridMap& map = scenario.map;
  const PomdpModel& model = scenario.model;
  Rng rng(derive_seed(seed, 0));

  EpisodeLog log;
  log.planner = kind;
  log.seed = seed;
  if (map.start_region().empty()) {
    log.start = sample_index(model.initial_belief().probs(), uniform01(rng));
  } else {
    const auto& region = map.start_region();
    log.start = region[static_cast<std::size_t>(
        std::min(uniform01(rng) * static_cast<double>(region.size()),
                 static_cast<double>(region.size() - 1)))];
  }

  Belief belief = model.initial_belief();
  StateIndex x = log.start;
  std::size_t stay_streak = 0;
  double discount_k = 1.0;
  for (std::size_t k = 0; k < limits.max_steps; ++k) {
    StepRecord rec;
    rec.step = k;
    rec.state = x;
    PlanStats stats;
    rec.action = planner.act(belief, stats);
    rec.planning_ms = stats.elapsed_ms;
    rec.expansions = stats.expansions;
    rec.reward = model.reward(x, rec.action);
    log.discounted_return += discount_k * rec.reward;
    discount_k *= model.discount();

    const auto kernel = intended_kernel(rec.action, scenario.params.noise);
    const std::size_t slot = sample_index(kernel, uniform01(rng));
    const Cell c = map.cell(x);
    const int col = c.col + stencil_dx(slot);
    const int row = c.row + stencil_dy(slot);
    rec.raw_successor = map.contains(col, row)
                            ? static_cast<std::int64_t>(map.index(col, row))
                            : -1;
    rec.collision = map.occupied_at(col, row);
    rec.next_state = rec.collision ? x : map.index(col, row);
    rec.observation =
        sample_index(model.observation_row(rec.next_state), uniform01(rng));
    if (rec.collision) ++log.collisions;
    log.steps.push_back(rec);

    stay_streak = rec.action == kStay ? stay_streak + 1 : 0;
    if (stay_streak == limits.stop_patience) {
      log.outcome = x == map.goal() ? Outcome::kSuccess : Outcome::kWrongStop;
      return log;
    }
    try {
      belief = belief_update(model, belief, rec.action, rec.observation);
      planner.observe(rec.action, rec.observation, belief);
    } catch (const ZeroLikelihoodObservation&) {
      log.outcome = Outcome::kModel;
      return log;
    }
    x = rec.next_state;
  }
  log.outcome = Outcome::kStepCap;
  return log;
}

double discounted_return(std::span<const StepRecord> steps, double discount) {
  double total = 0.0;
  double factor = 1.0;
  for (const StepRecord& s : steps) {
    total += factor * s.reward;
    factor *= discount;
  }
  return total;
}

Stat describe(std::span<const double> values) {
  Stat s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

PlannerSummary summarize(PlannerKind planner, std::span<const EpisodeLog> logs) {
  PlannerSummary out;
  out.planner = planner;
  out.episodes = logs.size();
  std::vector<double> reward, collisions, steps_all;
  std::vector<double> reward_ok, collisions_ok, steps_ok;
  double ms_total = 0.0;
  std::size_t ms_count = 0;
  for (const EpisodeLog& log : logs) {
    switch (log.outcome) {
      case Outcome::kSuccess: ++out.successes; break;
      case Outcome::kWrongStop: ++out.wrong_stops; break;
      case Outcome::kStepCap: ++out.step_caps; break;
      case Outcome::kModel: ++out.model_failures; break;
    }
    const double n = static_cast<double>(log.num_steps());
    reward.push_back(log.discounted_return);
    collisions.push_back(static_cast<double>(log.collisions));
    steps_all.push_back(n);
    if (log.outcome == Outcome::kSuccess) {
      reward_ok.push_back(log.discounted_return);
      collisions_ok.push_back(static_cast<double>(log.collisions));
      steps_ok.push_back(n);
    }
    for (const StepRecord& s : log.steps) {
      ms_total += s.planning_ms;
      ++ms_count;
    }
  }
  out.failure_rate =
      logs.empty() ? 0.0
                   : static_cast<double>(out.episodes - out.successes) /
                         static_cast<double>(out.episodes);
  out.reward = describe(reward);
  out.collisions = describe(collisions);
  out.steps = describe(steps_ok);
  out.reward_success = describe(reward_ok);
  out.collisions_success = describe(collisions_ok);
  out.steps_all = describe(steps_all);
  out.mean_planning_ms = ms_count == 0 ? 0.0 : ms_total / static_cast<double>(ms_count);
  return out;
}

BatchResult run_batch(const Scenario& scenario, const OfflineSolution& offline,
                      const BatchConfig& config) {
  if (config.planners.empty()) throw InvalidArgument("no planners requested");
  if (config.episodes == 0) throw InvalidArgument("episodes must be positive");
  BatchResult result;
  result.logs.assign(config.planners.size(),
                     std::vector<EpisodeLog>(config.episodes));
  const std::size_t jobs = config.planners.size() * config.episodes;
  std::size_t threads = config.threads != 0
                            ? config.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs && !failed; job = next++) {
      const std::size_t p = job / config.episodes;
      const std::size_t e = job % config.episodes;
      const std::uint64_t seed = config.seed_base + e;
      try {
        auto planner = make_planner(config.planners[p], scenario, offline,
                                    config.planner_options, seed);
        result.logs[p][e] = run_episode(scenario, *planner, config.planners[p],
                                        seed, config.limits);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t p = 0; p < config.planners.size(); ++p) {
    result.summaries.push_back(summarize(config.planners[p], result.logs[p]));
  }
  return result;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void stat_cells(std::ostream& out, const Stat& s) {
  out << ',' << num(s.mean) << ',' << num(s.std);
}

}  // namespace

void write_episode_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                       bool header) {
  if (header) {
    out << "planner,seed,step,state,action,raw_successor,next_state,"
           "observation,reward,collision,outcome\n";
  }
  for (const EpisodeLog& log : logs) {
    for (const StepRecord& s : log.steps) {
      out << to_string(log.planner) << ',' << log.seed << ',' << s.step << ','
          << s.state << ',' << s.action << ',' << s.raw_successor << ','
          << s.next_state << ',' << s.observation << ',' << num(s.reward) << ','
          << (s.collision ? 1 : 0) << ',' << to_string(log.outcome) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out,
                       std::span<const PlannerSummary> summaries) {
  out << "planner,episodes,successes,wrong_stops,step_caps,model_failures,"
         "failure_rate,reward_mean,reward_std,collisions_mean,collisions_std,"
         "steps_mean,steps_std,reward_success_mean,reward_success_std,"
         "collisions_success_mean,collisions_success_std,steps_all_mean,"
         "steps_all_std\n";
  for (const PlannerSummary& s : summaries) {
    out << to_string(s.planner) << ',' << s.episodes << ',' << s.successes << ','
        << s.wrong_stops << ',' << s.step_caps << ',' << s.model_failures << ','
        << num(s.failure_rate);
    stat_cells(out, s.reward);
    stat_cells(out, s.collisions);
    stat_cells(out, s.steps);
    stat_cells(out, s.reward_success);
    stat_cells(out, s.collisions_success);
    stat_cells(out, s.steps_all);
    out << '\n';
  }
}

void write_timing_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                      bool header) {
  if (header) out << "planner,seed,step,planning_ms,expansions\n";
  for (const EpisodeLog& log : logs) {
    for (const StepRecord& s : log.steps) {
      out << to_string(log.planner) << ',' << log.seed << ',' << s.step << ','
          << num(s.planning_ms) << ',' << s.expansions << '\n';
    }
  }
}

std::string format_summary_table(std::span<const PlannerSummary> summaries) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %18s %16s %18s %9s %12s\n", "planner",
                "reward", "collisions", "steps", "failure", "plan ms");
  out << line;
  for (const PlannerSummary& s : summaries) {
    std::snprintf(line, sizeof line,
                  "%-8s %8.2f +- %6.2f %6.2f +- %6.2f %8.2f +- %6.2f %9.3f %12.2f\n",
                  to_string(s.planner), s.reward.mean, s.reward.std,
                  s.collisions.mean, s.collisions.std, s.steps.mean, s.steps.std,
                  s.failure_rate, s.mean_planning_ms);
    out << line;
  }
  return out.str();
}

std::vector<EpisodeCsvRow> read_episode_csv(std::istream& in) {
  std::vector<EpisodeCsvRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("episode CSV is empty");
  if (line.rfind("planner,seed,step,", 0) != 0) {
    throw InvalidArgument("episode CSV header not recognised");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw InvalidArgument("episode CSV line " + std::to_string(line_no) +
                            ": expected 11 fields");
    }
    try {
      EpisodeCsvRow row;
      row.planner = parse_planner(cells[0]);
      row.seed = std::stoull(cells[1]);
      row.record.step = std::stoull(cells[2]);
      row.record.state = std::stoull(cells[3]);
      row.record.action = std::stoull(cells[4]);
      row.record.raw_successor = std::stoll(cells[5]);
      row.record.next_state = std::stoull(cells[6]);
      row.record.observation = std::stoull(cells[7]);
      row.record.reward = std::stod(cells[8]);
      row.record.collision = cells[9] == "1";
      rows.push_back(row);
    } catch (const InvalidArgument&) {
      throw;
    } catch (const std::exception&) {
      throw InvalidArgument("episode CSV line " + std::to_string(line_no) +
                            ": bad number");
    }
  }
  return rows;
}

}  // namespace qvts

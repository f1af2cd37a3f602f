#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "qvts/simulator.hpp"

using namespace qvts;
using namespace qvts::testing;

namespace {

OfflineSolution solve_offline(const PomdpModel& m, std::size_t points = 24) {
  SolverConfig c;
  c.pbvi_target_size = points;
  c.pbvi_sweeps = 60;
  return {solve_fib(m, c).alphas, solve_pbvi(m, build_belief_set(m, c), c),
          solve_mdp(m, c)};
}

PlannerOptions fast_options() {
  PlannerOptions o;
  o.tree.time_budget_ms = 0.0;
  o.tree.max_expansions = 30;
  return o;
}

// Forwards to a real planner and keeps every posterior it is handed.
class RecordingPlanner : public Planner {
 public:
  explicit RecordingPlanner(std::unique_ptr<Planner> inner) : inner_(std::move(inner)) {}
  ActionIndex act(const Belief& b, PlanStats& stats) override {
    return inner_->act(b, stats);
  }
  void observe(ActionIndex a, ObservationIndex z, const Belief& posterior) override {
    posteriors.push_back(posterior);
    inner_->observe(a, z, posterior);
  }
  std::vector<Belief> posteriors;

 private:
  std::unique_ptr<Planner> inner_;
};

std::string episodes_csv(const BatchResult& r) {
  std::ostringstream out;
  for (std::size_t p = 0; p < r.logs.size(); ++p) write_episode_csv(out, r.logs[p], p == 0);
  return out.str();
}

std::string summary_csv(const BatchResult& r) {
  std::ostringstream out;
  write_summary_csv(out, r.summaries);
  return out.str();
}

}  // namespace

TEST_CASE("planner names") {
  CHECK(parse_planner("qvts") == PlannerKind::kQvts);
  CHECK(parse_planner("astar") == PlannerKind::kAstar);
  CHECK(parse_planner("mdp") == PlannerKind::kMdp);
  CHECK_THROWS_AS(parse_planner("pomcp"), InvalidArgument);
  CHECK(std::string(to_string(Outcome::kWrongStop)) == "wrong_stop");
}

TEST_CASE("a goal-only world ends after the stop streak") {
  const Scenario s(parse_map("G"), GridModelParams{});
  const OfflineSolution off = solve_offline(s.model, 1);
  for (PlannerKind kind : {PlannerKind::kQvts, PlannerKind::kAstar, PlannerKind::kMdp}) {
    auto planner = make_planner(kind, s, off, fast_options(), 1);
    const EpisodeLog log = run_episode(s, *planner, kind, 1, EpisodeLimits{});
    CHECK(log.outcome == Outcome::kSuccess);
    CHECK(log.num_steps() == 3);
    CHECK(log.discounted_return == 0.0);
    CHECK(log.collisions == 0);
  }
}

TEST_CASE("QVTS walks a crisp corridor straight to the goal") {
  const Scenario s(parse_map("S.G"), crisp_params());
  const OfflineSolution off = solve_offline(s.model);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto planner = make_planner(PlannerKind::kQvts, s, off, fast_options(), seed);
    const EpisodeLog log = run_episode(s, *planner, PlannerKind::kQvts, seed, EpisodeLimits{});
    CHECK(log.start == 0);
    CHECK(log.outcome == Outcome::kSuccess);
    CHECK(log.num_steps() == 2 + EpisodeLimits{}.stop_patience);
    CHECK(log.collisions == 0);
  }
}

TEST_CASE("episodes on a noisy map keep their records consistent") {
  const Scenario s(parse_map("....#\n.#...\n...G.\n#...."), GridModelParams{});
  const OfflineSolution off = solve_offline(s.model);
  EpisodeLimits limits;
  limits.max_steps = 60;
  for (PlannerKind kind : {PlannerKind::kQvts, PlannerKind::kAstar, PlannerKind::kMdp}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      RecordingPlanner planner(make_planner(kind, s, off, fast_options(), seed));
      const EpisodeLog log = run_episode(s, planner, kind, seed, limits);
      REQUIRE(log.num_steps() >= 1);
      CHECK(log.steps.front().state == log.start);
      CHECK(discounted_return(log.steps, s.model.discount()) == log.discounted_return);

      Belief replay = s.model.initial_belief();
      std::size_t collisions = 0;
      for (std::size_t k = 0; k < log.steps.size(); ++k) {
        const StepRecord& r = log.steps[k];
        CHECK(r.step == k);
        CHECK(r.reward == s.model.reward(r.state, r.action));
        if (k + 1 < log.steps.size()) CHECK(log.steps[k + 1].state == r.next_state);
        if (r.collision) {
          ++collisions;
          CHECK(r.next_state == r.state);
          CHECK((r.raw_successor < 0 || s.map.occupied(static_cast<StateIndex>(r.raw_successor))));
        } else {
          REQUIRE(r.raw_successor >= 0);
          CHECK(r.next_state == static_cast<StateIndex>(r.raw_successor));
          CHECK_FALSE(s.map.occupied(r.next_state));
        }
        if (k < planner.posteriors.size()) {
          replay = belief_update(s.model, replay, r.action, r.observation);
          for (StateIndex x = 0; x < s.model.num_states(); ++x) {
            CHECK(std::abs(replay[x] - planner.posteriors[k][x]) <= 1e-12);
          }
        }
      }
      CHECK(collisions == log.collisions);
      if (log.outcome == Outcome::kStepCap) CHECK(log.num_steps() == limits.max_steps);
      if (log.outcome == Outcome::kSuccess) CHECK(log.steps.back().state == s.map.goal());
      if (log.outcome == Outcome::kWrongStop) CHECK(log.steps.back().state != s.map.goal());
    }
  }
}

TEST_CASE("episode limits are validated") {
  const Scenario s(parse_map("G."), GridModelParams{});
  const OfflineSolution off = solve_offline(s.model, 2);
  auto planner = make_planner(PlannerKind::kAstar, s, off, fast_options(), 1);
  EpisodeLimits limits;
  limits.max_steps = 0;
  CHECK_THROWS_AS(run_episode(s, *planner, PlannerKind::kAstar, 1, limits), InvalidArgument);
}

TEST_CASE("describe") {
  const std::vector<double> one{4.0};
  CHECK(describe(one).mean == 4.0);
  CHECK(describe(one).std == 0.0);
  const std::vector<double> several{1.0, 2.0, 3.0, 4.0};
  CHECK(describe(several).mean == doctest::Approx(2.5));
  CHECK(describe(several).std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(std::isnan(describe({}).mean));
}

TEST_CASE("summaries follow the two averaging conventions") {
  std::vector<EpisodeLog> logs(3);
  logs[0].outcome = Outcome::kSuccess;
  logs[0].discounted_return = -4.0;
  logs[0].collisions = 1;
  logs[0].steps.resize(10);
  logs[1].outcome = Outcome::kWrongStop;
  logs[1].discounted_return = -10.0;
  logs[1].collisions = 3;
  logs[1].steps.resize(20);
  logs[2].outcome = Outcome::kSuccess;
  logs[2].discounted_return = -2.0;
  logs[2].steps.resize(6);
  const PlannerSummary s = summarize(PlannerKind::kMdp, logs);
  CHECK(s.episodes == 3);
  CHECK(s.successes == 2);
  CHECK(s.wrong_stops == 1);
  CHECK(s.failure_rate == doctest::Approx(1.0 / 3.0));
  CHECK(s.reward.mean == doctest::Approx(-16.0 / 3.0));
  CHECK(s.collisions.mean == doctest::Approx(4.0 / 3.0));
  CHECK(s.steps.mean == doctest::Approx(8.0));
  CHECK(s.steps_all.mean == doctest::Approx(12.0));
  CHECK(s.reward_success.mean == doctest::Approx(-3.0));
  CHECK(s.collisions_success.mean == doctest::Approx(0.5));
}

TEST_CASE("batches are reproducible and independent of the thread count") {
  const Scenario s(parse_map("....#\n.#...\n...G.\n#...."), GridModelParams{});
  const OfflineSolution off = solve_offline(s.model);
  BatchConfig c;
  c.episodes = 6;
  c.limits.max_steps = 80;
  c.planner_options = fast_options();
  c.threads = 1;
  const BatchResult a = run_batch(s, off, c);
  c.threads = 3;
  const BatchResult b = run_batch(s, off, c);
  CHECK(episodes_csv(a) == episodes_csv(b));
  CHECK(summary_csv(a) == summary_csv(b));
  REQUIRE(a.summaries.size() == 3);
  CHECK(a.summaries[0].planner == PlannerKind::kAstar);
  for (const auto& summary : a.summaries) {
    CHECK(summary.failure_rate >= 0.0);
    CHECK(summary.failure_rate <= 1.0);
  }
  for (std::size_t e = 0; e < c.episodes; ++e) CHECK(a.logs[2][e].seed == c.seed_base + e);

  c.seed_base = 100;
  CHECK(episodes_csv(run_batch(s, off, c)) != episodes_csv(a));
}

TEST_CASE("single-episode batches report zero spread") {
  const Scenario s(parse_map("S.G"), crisp_params());
  const OfflineSolution off = solve_offline(s.model);
  BatchConfig c;
  c.episodes = 1;
  c.planner_options = fast_options();
  const BatchResult r = run_batch(s, off, c);
  for (const auto& summary : r.summaries) {
    CHECK(summary.failure_rate == 0.0);
    CHECK(summary.reward.std == 0.0);
    CHECK(summary.steps.std == 0.0);
  }
}

TEST_CASE("episode CSV round-trips and rejects malformed input") {
  const Scenario s(parse_map("S.G"), crisp_params());
  const OfflineSolution off = solve_offline(s.model);
  BatchConfig c;
  c.episodes = 2;
  c.planner_options = fast_options();
  const BatchResult r = run_batch(s, off, c);
  std::istringstream in(episodes_csv(r));
  const std::vector<EpisodeCsvRow> rows = read_episode_csv(in);
  std::size_t i = 0;
  for (std::size_t p = 0; p < r.logs.size(); ++p) {
    for (const EpisodeLog& log : r.logs[p]) {
      for (const StepRecord& step : log.steps) {
        REQUIRE(i < rows.size());
        CHECK(rows[i].planner == log.planner);
        CHECK(rows[i].seed == log.seed);
        CHECK(rows[i].record.action == step.action);
        CHECK(rows[i].record.reward == step.reward);
        CHECK(rows[i].record.raw_successor == step.raw_successor);
        ++i;
      }
    }
  }
  CHECK(i == rows.size());

  std::istringstream bad_header("state,action\n");
  CHECK_THROWS_AS(read_episode_csv(bad_header), InvalidArgument);
  std::istringstream short_row(
      "planner,seed,step,state,action,raw_successor,next_state,observation,reward,collision,outcome\n"
      "qvts,1,0,0\n");
  CHECK_THROWS_AS(read_episode_csv(short_row), InvalidArgument);
  std::istringstream bad_number(
      "planner,seed,step,state,action,raw_successor,next_state,observation,reward,collision,outcome\n"
      "qvts,x,0,0,5,1,1,3,-1,0,success\n");
  CHECK_THROWS_AS(read_episode_csv(bad_number), InvalidArgument);
}

TEST_CASE("summary table lists every planner") {
  const Scenario s(parse_map("S.G"), crisp_params());
  const OfflineSolution off = solve_offline(s.model);
  BatchConfig c;
  c.episodes = 1;
  c.planner_options = fast_options();
  const std::string table = format_summary_table(run_batch(s, off, c).summaries);
  CHECK(table.find("astar") != std::string::npos);
  CHECK(table.find("mdp") != std::string::npos);
  CHECK(table.find("qvts") != std::string::npos);
}

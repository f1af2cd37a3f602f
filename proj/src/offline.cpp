#include "qvts/offline.hpp"

#include <chrono>
#include <filesystem>
#include <optional>

#include "qvts/alpha_cache.hpp"

namespace qvts {

namespace {

template <typename T>
T require(std::optional<T> cached, bool allow_solve, const char* what,
          bool& hit, auto&& solve) {
  if (cached) {
    hit = true;
    return std::move(*cached);
  }
  if (!allow_solve) {
    throw MissingPrerequisite(std::string("no usable cached ") + what);
  }
  return solve();
}

}  // namespace

OfflineSolution load_or_solve(const Scenario& scenario,
                              const SolverConfig& config,
                              const std::string& cache_dir, bool allow_solve,
                              SolveReport* report) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const PomdpModel& model = scenario.model;
  const std::size_t n = model.num_states();
  const bool use_cache = !cache_dir.empty();
  if (use_cache && allow_solve) std::filesystem::create_directories(cache_dir);
  const CachePaths paths(cache_dir.empty() ? "." : cache_dir);
  const std::uint64_t key = solver_cache_key(model, config);
  SolveReport local;
  SolveReport& rep = report != nullptr ? *report : local;

  auto maybe = [&](auto loader) { return use_cache ? loader() : std::nullopt; };

  bool fib_converged = true;
  AlphaSet fib = require(
      maybe([&] { return load_alpha_set(paths.fib, key, n, &fib_converged); }),
      allow_solve, "upper bound", rep.fib_cached, [&] {
        FibResult r = solve_fib(model, config);
        rep.fib_iterations = r.iterations;
        fib_converged = r.converged;
        if (use_cache) save_alpha_set(paths.fib, key, r.alphas, r.converged);
        return r.alphas;
      });
  rep.fib_converged = fib_converged;

  std::vector<Belief> beliefs = require(
      maybe([&] { return load_beliefs(paths.beliefs, key, n); }), allow_solve,
      "belief set", rep.beliefs_cached, [&] {
        std::vector<Belief> b = build_belief_set(model, config);
        if (use_cache) save_beliefs(paths.beliefs, key, b);
        return b;
      });
  rep.belief_points = beliefs.size();

  AlphaSet pbvi = require(
      maybe([&] { return load_alpha_set(paths.pbvi, key, n); }), allow_solve,
      "lower bound", rep.pbvi_cached, [&] {
        AlphaSet set = solve_pbvi(model, beliefs, config);
        if (use_cache) save_alpha_set(paths.pbvi, key, set);
        return set;
      });
  rep.pbvi_vectors = pbvi.size();

  MdpSolution mdp = require(
      maybe([&] { return load_mdp(paths.mdp, key, n); }), allow_solve,
      "MDP policy", rep.mdp_cached, [&] {
        MdpSolution m = solve_mdp(model, config);
        if (use_cache) save_mdp(paths.mdp, key, m);
        return m;
      });
  rep.mdp_iterations = mdp.iterations;
  rep.mdp_converged = mdp.converged;

  rep.upper_at_b0 = alpha_value(model.initial_belief(), fib).value;
  rep.lower_at_b0 = alpha_value(model.initial_belief(), pbvi).value;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return OfflineSolution{std::move(fib), std::move(pbvi), std::move(mdp)};
}

}  // namespace qvts

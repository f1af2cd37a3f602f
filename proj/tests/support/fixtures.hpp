#pragma once

// Small models and random generators shared by unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "qvts/gridworld.hpp"
#include "qvts/pomdp.hpp"
#include "qvts/random.hpp"

namespace qvts::testing {

// Two states, one action with identity motion, two observations:
// O(x0, z0) = 0.9 and O(x1, z0) = 0.2, uniform b0. After (a0, z0) the
// posterior is [9/11, 2/11] and P(z0) = 0.55.
inline PomdpModel two_state_model(double discount = 0.95) {
  ModelTables t;
  t.num_states = 2;
  t.num_actions = 1;
  t.num_observations = 2;
  t.transitions = {{{0, 1.0}}, {{1, 1.0}}};
  t.observations = {0.9, 0.1, 0.2, 0.8};
  t.rewards = {-1.0, 0.0};
  t.discount = discount;
  t.initial_belief = Belief::uniform(2);
  return PomdpModel(std::move(t));
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  for (double& v : w) v = e(rng);
  const double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= s;
  return w;
}

inline Belief random_belief(std::size_t n, Rng& rng) {
  return Belief::normalize(random_simplex(n, rng));
}

// Sparse-ish belief: with probability 1/2 a random subset of the states is
// zeroed first, so probes also hit the faces of the simplex.
inline Belief random_probe(std::size_t n, Rng& rng) {
  std::vector<double> w = random_simplex(n, rng);
  if (rng() % 2 == 0) {
    const std::size_t keep = 1 + rng() % n;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = keep; i < n; ++i) w[order[i]] = 0.0;
  }
  return Belief::normalize(std::move(w));
}

struct RandomModelSpec {
  std::size_t max_states = 6;
  std::size_t max_actions = 3;
  std::size_t max_observations = 3;
  double discount = 0.9;
};

// Random dense POMDP with rewards in [-1, 1], every T row supported on at
// most three successors and O rows that sometimes contain exact zeros.
inline PomdpModel random_model(std::uint64_t seed, const RandomModelSpec& spec = {}) {
  Rng rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
  };
  ModelTables t;
  t.num_states = pick(2, spec.max_states);
  t.num_actions = pick(1, spec.max_actions);
  t.num_observations = pick(1, spec.max_observations);
  t.discount = spec.discount;
  const std::size_t n = t.num_states;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t a = 0; a < t.num_actions; ++a) {
      const std::size_t k = pick(1, std::min<std::size_t>(3, n));
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(k);
      std::sort(order.begin(), order.end());
      const std::vector<double> p = random_simplex(k, rng);
      std::vector<Transition> row;
      for (std::size_t i = 0; i < k; ++i) row.push_back({order[i], p[i]});
      t.transitions.push_back(std::move(row));
    }
  }
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<double> o = random_simplex(t.num_observations, rng);
    if (t.num_observations > 1 && rng() % 3 == 0) {
      o[rng() % t.num_observations] = 0.0;
      const double s = std::accumulate(o.begin(), o.end(), 0.0);
      for (double& v : o) v /= s;
    }
    t.observations.insert(t.observations.end(), o.begin(), o.end());
  }
  std::uniform_real_distribution<double> r(-1.0, 1.0);
  for (std::size_t i = 0; i < n * t.num_actions; ++i) t.rewards.push_back(r(rng));
  t.initial_belief = random_belief(n, rng);
  return PomdpModel(std::move(t));
}

inline std::vector<double> to_vector(const Belief& b) {
  return {b.probs().begin(), b.probs().end()};
}

// Deterministic motion, perfect sensing.
inline GridModelParams crisp_params(double discount = 0.95) {
  GridModelParams p;
  p.noise = {1.0, 0.0, 0.0};
  p.sensor_accuracy = 1.0;
  p.discount = discount;
  return p;
}

// Same dynamics and rewards with |Z| = |X| and O the identity, so the state
// is observed exactly.
inline PomdpModel with_identity_sensor(const PomdpModel& m) {
  ModelTables t;
  t.num_states = m.num_states();
  t.num_actions = m.num_actions();
  t.num_observations = m.num_states();
  t.discount = m.discount();
  for (StateIndex x = 0; x < m.num_states(); ++x) {
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
      const auto row = m.transitions(x, a);
      t.transitions.emplace_back(row.begin(), row.end());
      t.rewards.push_back(m.reward(x, a));
    }
  }
  t.observations.assign(m.num_states() * m.num_states(), 0.0);
  for (StateIndex x = 0; x < m.num_states(); ++x) {
    t.observations[x * m.num_states() + x] = 1.0;
  }
  t.initial_belief = m.initial_belief();
  return PomdpModel(std::move(t));
}

// States 0..n-1 on a line; action 0 moves right, action 1 stays. The last
// state is absorbing and free of cost, every other step costs 1. Sensing is
// exact.
inline PomdpModel chain_model(std::size_t n, double discount, Belief b0) {
  ModelTables t;
  t.num_states = n;
  t.num_actions = 2;
  t.num_observations = n;
  t.discount = discount;
  for (StateIndex x = 0; x < n; ++x) {
    t.transitions.push_back({{std::min(x + 1, n - 1), 1.0}});
    t.transitions.push_back({{x, 1.0}});
    const double r = x + 1 == n ? 0.0 : -1.0;
    t.rewards.push_back(r);
    t.rewards.push_back(r);
  }
  t.observations.assign(n * n, 0.0);
  for (StateIndex x = 0; x < n; ++x) t.observations[x * n + x] = 1.0;
  t.initial_belief = std::move(b0);
  return PomdpModel(std::move(t));
}

// Classic tiger problem: listen (0), open left (1), open right (2); the
// tiger sits behind door 0 or 1, listening is right 85% of the time.
inline PomdpModel tiger_model(double discount = 0.95) {
  ModelTables t;
  t.num_states = 2;
  t.num_actions = 3;
  t.num_observations = 2;
  t.discount = discount;
  for (StateIndex x = 0; x < 2; ++x) {
    t.transitions.push_back({{x, 1.0}});
    t.transitions.push_back({{0, 0.5}, {1, 0.5}});
    t.transitions.push_back({{0, 0.5}, {1, 0.5}});
    t.rewards.push_back(-1.0);
    t.rewards.push_back(x == 0 ? -100.0 : 10.0);
    t.rewards.push_back(x == 1 ? -100.0 : 10.0);
  }
  t.observations = {0.85, 0.15, 0.15, 0.85};
  t.initial_belief = Belief::uniform(2);
  return PomdpModel(std::move(t));
}

}  // namespace qvts::testing

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qvts/pomdp.hpp"

using namespace qvts;
using qvts::testing::random_belief;
using qvts::testing::random_model;
using qvts::testing::two_state_model;

namespace {

ModelTables one_state_tables() {
  ModelTables t;
  t.num_states = 1;
  t.num_actions = 1;
  t.num_observations = 1;
  t.transitions = {{{0, 1.0}}};
  t.observations = {1.0};
  t.rewards = {0.0};
  t.initial_belief = Belief::uniform(1);
  return t;
}

// Three states, identity motion for a single action; observation z0 has the
// same likelihood everywhere and z1 never happens.
PomdpModel flat_sensor_model() {
  ModelTables t;
  t.num_states = 3;
  t.num_actions = 1;
  t.num_observations = 2;
  t.transitions = {{{0, 1.0}}, {{1, 1.0}}, {{2, 1.0}}};
  t.observations = {1.0, 0.0, 1.0, 0.0, 1.0, 0.0};
  t.rewards = {-2.0, -1.0, 0.0};
  t.initial_belief = Belief::uniform(3);
  return PomdpModel(std::move(t));
}

}  // namespace

TEST_CASE("belief construction validates the simplex") {
  CHECK_NOTHROW(Belief({0.25, 0.75}));
  CHECK_THROWS_AS(Belief({0.5, 0.6}), InvalidBelief);
  CHECK_THROWS_AS(Belief({-0.1, 1.1}), InvalidBelief);
  CHECK_THROWS_AS(Belief::normalize({0.0, 0.0}), InvalidBelief);
  const Belief u = Belief::uniform(4);
  for (double p : u.probs()) CHECK(p == doctest::Approx(0.25));
  const Belief pm = Belief::point_mass(3, 2);
  CHECK(pm[2] == 1.0);
  CHECK(pm[0] == 0.0);
}

TEST_CASE("model construction checks stochasticity") {
  CHECK_NOTHROW(PomdpModel{one_state_tables()});

  SUBCASE("small drift is renormalized") {
    ModelTables t = one_state_tables();
    t.transitions = {{{0, 1.0 + 1e-8}}};
    const PomdpModel m(std::move(t));
    CHECK(m.transitions(0, 0)[0].prob == 1.0);
  }
  SUBCASE("large drift is rejected") {
    ModelTables t = one_state_tables();
    t.observations = {0.9};
    CHECK_THROWS_AS(PomdpModel(std::move(t)), InvalidModel);
  }
  SUBCASE("discount must lie in (0, 1)") {
    ModelTables t = one_state_tables();
    t.discount = 1.0;
    CHECK_THROWS_AS(PomdpModel(std::move(t)), InvalidModel);
  }
  SUBCASE("negative entries are rejected") {
    ModelTables t = one_state_tables();
    t.num_observations = 2;
    t.observations = {1.5, -0.5};
    CHECK_THROWS_AS(PomdpModel(std::move(t)), InvalidModel);
  }
}

TEST_CASE("belief_update on the two-state example") {
  const PomdpModel m = two_state_model();
  const Belief post = belief_update(m, Belief::uniform(2), 0, 0);
  CHECK(post[0] == doctest::Approx(9.0 / 11.0).epsilon(1e-12));
  CHECK(post[1] == doctest::Approx(2.0 / 11.0).epsilon(1e-12));
  CHECK(obs_marginal(m, Belief::uniform(2), 0, 0) == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("belief_update moves a point mass along a deterministic chain") {
  ModelTables t;
  t.num_states = 2;
  t.num_actions = 1;
  t.num_observations = 2;
  t.transitions = {{{1, 1.0}}, {{1, 1.0}}};
  t.observations = {0.5, 0.5, 0.5, 0.5};
  t.rewards = {0.0, 0.0};
  t.initial_belief = Belief::point_mass(2, 0);
  const PomdpModel m(std::move(t));
  const Belief post = belief_update(m, m.initial_belief(), 0, 1);
  CHECK(post == Belief::point_mass(2, 1));
}

TEST_CASE("uninformative observation leaves the belief unchanged") {
  const PomdpModel m = flat_sensor_model();
  const Belief post = belief_update(m, Belief::uniform(3), 0, 0);
  for (StateIndex x = 0; x < 3; ++x) CHECK(post[x] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("obs_marginal extremes and zero-likelihood updates") {
  const PomdpModel m = flat_sensor_model();
  CHECK(obs_marginal(m, Belief::uniform(3), 0, 0) == doctest::Approx(1.0));
  CHECK(obs_marginal(m, Belief::uniform(3), 0, 1) == 0.0);
  try {
    belief_update(m, Belief::uniform(3), 0, 1);
    FAIL("expected ZeroLikelihoodObservation");
  } catch (const ZeroLikelihoodObservation& e) {
    CHECK(e.observation() == 1);
    CHECK(e.likelihood() == 0.0);
  }
}

TEST_CASE("belief_reward is the belief-weighted reward") {
  const PomdpModel m = flat_sensor_model();
  CHECK(belief_reward(m, Belief({0.2, 0.3, 0.5}), 0) == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(belief_reward(m, Belief::point_mass(3, 0), 0) == -2.0);
  const PomdpModel two = two_state_model();
  CHECK(belief_reward(two, Belief::uniform(2), 0) == doctest::Approx(-0.5));
}

TEST_CASE("alpha_value picks the best vector and breaks ties low") {
  const AlphaSet set(2, {{{0.0, 1.0}, 0}, {{1.0, 0.0}, 1}});
  const AlphaValue v = alpha_value(Belief({0.3, 0.7}), set);
  CHECK(v.value == doctest::Approx(0.7));
  CHECK(v.action == 0);

  const AlphaSet single(2, {{{3.5, 3.5}, 2}});
  const AlphaValue s = alpha_value(Belief({0.9, 0.1}), single);
  CHECK(s.value == doctest::Approx(3.5));
  CHECK(s.action == 2);

  const AlphaSet twins(2, {{{1.0, 2.0}, 5}, {{1.0, 2.0}, 3}});
  CHECK(alpha_value(Belief::uniform(2), twins).action == 5);
  CHECK(alpha_value(Belief::uniform(2), twins).index == 0);

  CHECK_THROWS(AlphaSet(2, {}));
  CHECK_THROWS(AlphaSet(2, {{{1.0}, 0}}));
}

TEST_CASE("posterior consistency: sum_z P(z) Phi(b,a,z) equals the prediction") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const PomdpModel m = random_model(seed);
    Rng rng(seed * 7919);
    const Belief b = random_belief(m.num_states(), rng);
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
      const std::vector<double> tau = predict(m, b, a);
      std::vector<double> mix(m.num_states(), 0.0);
      double total = 0.0;
      for (ObservationIndex z = 0; z < m.num_observations(); ++z) {
        const double p = obs_marginal(m, b, a, z);
        total += p;
        if (p <= kZeroLikelihood) continue;
        const Belief post = belief_update(m, b, a, z);
        double sum = 0.0;
        for (StateIndex x = 0; x < m.num_states(); ++x) {
          mix[x] += p * post[x];
          sum += post[x];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
      for (StateIndex x = 0; x < m.num_states(); ++x) {
        CHECK(std::abs(mix[x] - tau[x]) < 1e-8);
      }
    }
  }
}

TEST_CASE("alpha_value is convex in the belief") {
  Rng rng(42);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<AlphaVector> vs(1 + rng() % 5);
    for (auto& v : vs) {
      v.values.resize(n);
      for (double& e : v.values) e = coef(rng);
    }
    const AlphaSet set(n, std::move(vs));
    const Belief b1 = random_belief(n, rng);
    const Belief b2 = random_belief(n, rng);
    const double lambda = unit(rng);
    std::vector<double> mix(n);
    for (std::size_t x = 0; x < n; ++x) mix[x] = lambda * b1[x] + (1 - lambda) * b2[x];
    const double lhs = alpha_value(Belief::normalize(mix), set).value;
    const double rhs = lambda * alpha_value(b1, set).value +
                       (1 - lambda) * alpha_value(b2, set).value;
    CHECK(lhs <= rhs + 1e-9);
  }
}

TEST_CASE("observation classes group identical sensor rows") {
  const PomdpModel m = flat_sensor_model();
  CHECK(m.num_observation_classes() == 1);
  const PomdpModel two = two_state_model();
  CHECK(two.num_observation_classes() == 2);
  CHECK(two.observation_class(0) != two.observation_class(1));
}

TEST_CASE("content hash distinguishes models") {
  CHECK(two_state_model().content_hash() == two_state_model().content_hash());
  CHECK(two_state_model(0.95).content_hash() != two_state_model(0.9).content_hash());
}

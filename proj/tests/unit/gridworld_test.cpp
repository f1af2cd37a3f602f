#include <doctest.h>

#include <cmath>
#include <map>

#include "qvts/gridworld.hpp"

using namespace qvts;

namespace {

double prob_to(const TransitionTable& t, StateIndex x, ActionIndex a,
               StateIndex y) {
  double p = 0.0;
  for (const Transition& e : t[x * kNumGridActions + a]) {
    if (e.next == y) p += e.prob;
  }
  return p;
}

GridMap open_map(int w, int h, int goal_col, int goal_row) {
  std::string text;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) text += (c == goal_col && r == goal_row) ? 'G' : '.';
    text += '\n';
  }
  return parse_map(text);
}

MapParseError::Kind parse_error_kind(std::string_view text) {
  try {
    parse_map(text);
  } catch (const MapParseError& e) {
    return e.kind();
  }
  FAIL("map parsed unexpectedly");
  return MapParseError::Kind::kEmpty;
}

}  // namespace

TEST_CASE("parse_map reads the four symbols") {
  const GridMap m = parse_map("G.\n.#");
  CHECK(m.width() == 2);
  CHECK(m.height() == 2);
  CHECK(m.goal() == 0);
  CHECK(m.occupied(3));
  CHECK_FALSE(m.occupied(1));
  CHECK(m.free_cells().size() == 3);

  const GridMap s = parse_map("S.G\r\n.S.\r\n");
  CHECK(s.start_region() == std::vector<StateIndex>{0, 4});
}

TEST_CASE("parse_map errors") {
  CHECK(parse_error_kind("..\n.#") == MapParseError::Kind::kMissingGoal);
  CHECK(parse_error_kind("G..\n.#") == MapParseError::Kind::kNonRectangular);
  CHECK(parse_error_kind("GG\n..") == MapParseError::Kind::kMultipleGoals);
  CHECK(parse_error_kind("G?\n..") == MapParseError::Kind::kBadCharacter);
  CHECK(parse_error_kind("\n\n") == MapParseError::Kind::kEmpty);
  CHECK(std::string(to_string(MapParseError::Kind::kMissingGoal)) == "MissingGoal");
}

TEST_CASE("map text round-trips") {
  const std::string text = "#S..#\n.#G..\nS...#\n";
  const GridMap m = parse_map(text);
  CHECK(serialize_map(m) == text);
  CHECK(parse_map(serialize_map(m)) == m);

  LandmarkMapParams p;
  p.width = 30;
  p.height = 12;
  p.num_landmarks = 4;
  p.seed = 9;
  const GridMap g = generate_landmark_map(p);
  CHECK(parse_map(serialize_map(g)) == g);
}

TEST_CASE("motion noise must be a distribution") {
  CHECK_NOTHROW(MotionNoise{}.validate());
  CHECK_THROWS_AS((MotionNoise{0.8, 0.2, 0.05}.validate()), InvalidNoise);
  CHECK_THROWS_AS((MotionNoise{1.1, -0.1, 0.0}.validate()), InvalidNoise);
  CHECK_THROWS_AS(build_transition(open_map(3, 3, 0, 0), MotionNoise{0.5, 0.5, 0.5}),
                  InvalidNoise);
}

TEST_CASE("transition kernel on a free 3x3 map") {
  const GridMap m = open_map(3, 3, 0, 0);
  const TransitionTable t = build_transition(m, MotionNoise{});
  const StateIndex c = m.index(1, 1);
  CHECK(prob_to(t, c, kUp, m.index(1, 0)) == doctest::Approx(0.8));
  CHECK(prob_to(t, c, kUp, c) == doctest::Approx(0.1));
  CHECK(prob_to(t, c, kUp, m.index(0, 0)) == doctest::Approx(0.05));
  CHECK(prob_to(t, c, kUp, m.index(2, 0)) == doctest::Approx(0.05));
  for (StateIndex x = 0; x < m.size(); ++x) CHECK(prob_to(t, x, kStay, x) == 1.0);
}

TEST_CASE("mass aimed at an occupied cell stays put") {
  const GridMap m = parse_map("G#.\n...\n...");
  const TransitionTable t = build_transition(m, MotionNoise{});
  const StateIndex c = m.index(1, 1);
  CHECK(prob_to(t, c, kUp, c) == doctest::Approx(0.9));
  CHECK(prob_to(t, c, kUp, m.index(1, 0)) == 0.0);
  CHECK(prob_to(t, c, kUp, m.index(0, 0)) == doctest::Approx(0.05));
  CHECK(prob_to(t, c, kUp, m.index(2, 0)) == doctest::Approx(0.05));
}

TEST_CASE("clamped kernel invariants on a generated map") {
  LandmarkMapParams p;
  p.width = 24;
  p.height = 10;
  p.num_landmarks = 5;
  p.seed = 3;
  const GridMap m = generate_landmark_map(p);
  const MotionNoise noise{0.7, 0.1, 0.1};
  const TransitionTable t = build_transition(m, noise);
  for (StateIndex x = 0; x < m.size(); ++x) {
    for (ActionIndex a = 0; a < kNumGridActions; ++a) {
      double sum = 0.0;
      for (const Transition& e : t[x * kNumGridActions + a]) {
        sum += e.prob;
        if (e.next != x) CHECK_FALSE(m.occupied(e.next));
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      if (m.occupied(x)) CHECK(prob_to(t, x, a, x) == 1.0);
    }
  }
  for (ActionIndex a = 0; a < kNumGridActions; ++a) {
    const auto k = intended_kernel(a, noise);
    double sum = 0.0;
    for (double v : k) sum += v;
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("sensor model") {
  const GridMap m = open_map(3, 3, 0, 0);
  const std::vector<double> o = build_observation(m, 0.95);
  const StateIndex c = m.index(1, 1);
  CHECK(cell_signature(m, c) == 0);
  CHECK(o[c * kNumGridObservations + 0] == doctest::Approx(0.81450625).epsilon(1e-12));
  CHECK(o[c * kNumGridObservations + 1] ==
        doctest::Approx(0.95 * 0.95 * 0.95 * 0.05).epsilon(1e-12));
  // Top-left corner: the up and left sensors see the border.
  CHECK(cell_signature(m, m.index(0, 0)) == 0b0011);

  for (StateIndex x = 0; x < m.size(); ++x) {
    double sum = 0.0;
    for (std::size_t z = 0; z < kNumGridObservations; ++z) sum += o[x * kNumGridObservations + z];
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  const std::vector<double> exact = build_observation(m, 1.0);
  for (StateIndex x = 0; x < m.size(); ++x) {
    int ones = 0;
    for (std::size_t z = 0; z < kNumGridObservations; ++z) {
      const double v = exact[x * kNumGridObservations + z];
      if (v == 1.0) ++ones;
      else CHECK(v == 0.0);
    }
    CHECK(ones == 1);
  }
}

TEST_CASE("occupied cells get a uniform sensor row") {
  const GridMap m = parse_map("G#");
  const std::vector<double> o = build_observation(m, 0.95);
  for (std::size_t z = 0; z < kNumGridObservations; ++z) {
    CHECK(o[kNumGridObservations + z] == doctest::Approx(1.0 / 16));
  }
}

TEST_CASE("reward table") {
  const GridMap m = open_map(5, 5, 0, 0);
  const std::vector<double> r = build_reward(m, MotionNoise{});
  const StateIndex c = m.index(2, 2);
  CHECK(r[c * kNumGridActions + kStay] == -2.0);
  CHECK(r[m.goal() * kNumGridActions + kStay] == 0.0);
  CHECK(r[c * kNumGridActions + kUp] == doctest::Approx(-1.0));

  // Below the goal: the intended cell is worth 0, one lateral is off-map.
  const StateIndex below_goal = m.index(0, 1);
  CHECK(r[below_goal * kNumGridActions + kUp] == doctest::Approx(-0.25));
  // Into the border: the unclamped kernel charges the off-map cells.
  CHECK(r[below_goal * kNumGridActions + kLeft] == doctest::Approx(-1.9));
}

TEST_CASE("grid model assembly") {
  const GridMap m = parse_map("G#.\n...");
  const PomdpModel model = build_grid_model(m, GridModelParams{});
  CHECK(model.num_states() == 6);
  CHECK(model.num_actions() == 9);
  CHECK(model.num_observations() == 16);
  CHECK(model.discount() == 0.95);
  CHECK(model.initial_belief()[1] == 0.0);
  CHECK(model.initial_belief()[0] == doctest::Approx(0.2));
}

TEST_CASE("landmark maps are deterministic and valid") {
  LandmarkMapParams p;
  p.seed = 11;
  const GridMap a = generate_landmark_map(p);
  const GridMap b = generate_landmark_map(p);
  CHECK(a == b);
  CHECK(a.width() == 100);
  CHECK(a.height() == 40);
  CHECK_FALSE(a.occupied(a.goal()));
  p.seed = 12;
  CHECK_FALSE(generate_landmark_map(p) == a);
}

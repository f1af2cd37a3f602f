#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qvts {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;
using ObservationIndex = std::size_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class InvalidBelief : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised by belief_update when P(z | b, a) is at or below kZeroLikelihood.
class ZeroLikelihoodObservation : public Error {
 public:
  ZeroLikelihoodObservation(ActionIndex action, ObservationIndex observation,
                            double likelihood);
  ActionIndex action() const { return action_; }
  ObservationIndex observation() const { return observation_; }
  double likelihood() const { return likelihood_; }

 private:
  ActionIndex action_;
  ObservationIndex observation_;
  double likelihood_;
};

inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr double kRenormalizeTolerance = 1e-6;
inline constexpr double kZeroLikelihood = 1e-300;

/// Probability vector over the state set.
class Belief {
 public:
  Belief() = default;
  /// Validates entries in [0,1] and unit sum within kStochasticTolerance.
  explicit Belief(std::vector<double> probs);

  static Belief uniform(std::size_t num_states);
  static Belief point_mass(std::size_t num_states, StateIndex state);
  static Belief uniform_over(std::size_t num_states,
                             std::span<const StateIndex> support);
  /// Divides non-negative weights by their sum. Throws InvalidBelief when the
  /// sum is not positive.
  static Belief normalize(std::vector<double> weights);

  std::size_t size() const { return probs_.size(); }
  double operator[](StateIndex x) const { return probs_[x]; }
  std::span<const double> probs() const { return probs_; }

  bool operator==(const Belief&) const = default;

 private:
  std::vector<double> probs_;
};

struct Transition {
  StateIndex next;
  double prob;
};

struct ObservationEntry {
  ObservationIndex observation;
  double prob;
};

/// Raw tables from which a PomdpModel is assembled. Row layout is
/// state-major: transitions[x * |A| + a], observations[x * |Z| + z],
/// rewards[x * |A| + a].
struct ModelTables {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::size_t num_observations = 0;
  std::vector<std::vector<Transition>> transitions;
  std::vector<double> observations;
  std::vector<double> rewards;
  double discount = 0.95;
  Belief initial_belief;
};

/// Finite POMDP (X, A, Z, T, O, R, b0, gamma). Transitions are stored sparsely
/// per (state, action) row; observations and rewards densely. Immutable after
/// construction.
///
/// Rows whose sum deviates from one by at most kRenormalizeTolerance are
/// renormalized; larger deviations, negative entries, or a discount outside
/// (0, 1) raise InvalidModel.
class PomdpModel {
 public:
  explicit PomdpModel(ModelTables tables);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t num_observations() const { return num_observations_; }
  double discount() const { return discount_; }
  const Belief& initial_belief() const { return initial_belief_; }

  std::span<const Transition> transitions(StateIndex x, ActionIndex a) const {
    const std::size_t row = x * num_actions_ + a;
    return {transition_entries_.data() + transition_offsets_[row],
            transition_offsets_[row + 1] - transition_offsets_[row]};
  }
  double observation(StateIndex x, ObservationIndex z) const {
    return observations_[x * num_observations_ + z];
  }
  std::span<const double> observation_row(StateIndex x) const {
    return {observations_.data() + x * num_observations_, num_observations_};
  }
  /// Non-zero entries of O(x, .), ascending by observation.
  std::span<const ObservationEntry> observation_support(StateIndex x) const {
    return {observation_entries_.data() + observation_offsets_[x],
            observation_offsets_[x + 1] - observation_offsets_[x]};
  }
  double reward(StateIndex x, ActionIndex a) const {
    return rewards_[x * num_actions_ + a];
  }
  double min_reward() const { return min_reward_; }
  double max_reward() const { return max_reward_; }

  // States with bitwise-identical observation rows share a class. Solvers use
  // this to contract sums over successor states before the observation loop.
  std::size_t num_observation_classes() const { return class_rows_.size(); }
  std::size_t observation_class(StateIndex x) const { return state_class_[x]; }
  std::span<const double> class_observation_row(std::size_t c) const {
    return observation_row(class_rows_[c]);
  }

  /// Order-sensitive 64-bit digest of every table; used to key solver caches.
  std::uint64_t content_hash() const;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::size_t num_observations_;
  double discount_;
  Belief initial_belief_;
  std::vector<std::size_t> transition_offsets_;
  std::vector<Transition> transition_entries_;
  std::vector<double> observations_;
  std::vector<std::size_t> observation_offsets_;
  std::vector<ObservationEntry> observation_entries_;
  std::vector<double> rewards_;
  std::vector<std::size_t> state_class_;
  std::vector<StateIndex> class_rows_;
  double min_reward_;
  double max_reward_;
};

/// Predicted distribution sum_x T(x, a, .) b(x).
std::vector<double> predict(const PomdpModel& model, const Belief& b,
                            ActionIndex a);

/// P(z | b, a) = sum_x' O(x', z) sum_x T(x, a, x') b(x).
double obs_marginal(const PomdpModel& model, const Belief& b, ActionIndex a,
                    ObservationIndex z);

/// P(z | b, a) for every z.
std::vector<double> obs_marginals(const PomdpModel& model, const Belief& b,
                                  ActionIndex a);

/// Bayes filter: predict through T, weight by O(., z), renormalize.
Belief belief_update(const PomdpModel& model, const Belief& b, ActionIndex a,
                     ObservationIndex z);

/// Same update from an already computed prediction.
Belief belief_update_from_prediction(const PomdpModel& model,
                                     std::span<const double> prediction,
                                     ActionIndex a, ObservationIndex z);

/// R(b, a) = sum_x R(x, a) b(x).
double belief_reward(const PomdpModel& model, const Belief& b, ActionIndex a);

struct AlphaVector {
  std::vector<double> values;
  ActionIndex action = 0;

  bool operator==(const AlphaVector&) const = default;
};

struct AlphaValue {
  double value;
  ActionIndex action;
  std::size_t index;
};

/// Non-empty set of alpha-vectors; the max of their dot products with a belief
/// is a piecewise-linear convex value function.
class AlphaSet {
 public:
  AlphaSet(std::size_t dimension, std::vector<AlphaVector> vectors);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const AlphaVector& operator[](std::size_t i) const { return vectors_[i]; }
  auto begin() const { return vectors_.begin(); }
  auto end() const { return vectors_.end(); }
  const std::vector<AlphaVector>& vectors() const { return vectors_; }

  bool operator==(const AlphaSet&) const = default;

 private:
  std::size_t dimension_;
  std::vector<AlphaVector> vectors_;
};

/// max over the set of alpha . b, with the action of the argmax vector. Ties
/// go to the lowest vector index.
AlphaValue alpha_value(const Belief& b, const AlphaSet& set);

/// Indices of the strictly positive entries of b.
std::vector<StateIndex> belief_support(const Belief& b);

}  // namespace qvts

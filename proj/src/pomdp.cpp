#include "qvts/pomdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace qvts {

namespace {

// Sum check shared by every stochastic row: exact-enough rows pass, slightly
// drifted rows are rescaled, anything else is a modeling error.
template <typename Scale>
void check_stochastic_row(double sum, const std::string& what, Scale&& scale) {
  const double deviation = std::abs(sum - 1.0);
  if (deviation <= kStochasticTolerance) return;
  if (deviation <= kRenormalizeTolerance && sum > 0.0) {
    scale(1.0 / sum);
    return;
  }
  std::ostringstream msg;
  msg << what << " sums to " << sum;
  throw InvalidModel(msg.str());
}

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

ZeroLikelihoodObservation::ZeroLikelihoodObservation(
    ActionIndex action, ObservationIndex observation, double likelihood)
    : Error("observation " + std::to_string(observation) +
            " has zero likelihood after action " + std::to_string(action)),
      action_(action),
      observation_(observation),
      likelihood_(likelihood) {}

Belief::Belief(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidBelief("belief over an empty state set");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidBelief("belief entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw InvalidBelief("belief sums to " + std::to_string(sum));
  }
}

Belief Belief::uniform(std::size_t num_states) {
  return Belief(std::vector<double>(num_states, 1.0 / num_states));
}

Belief Belief::point_mass(std::size_t num_states, StateIndex state) {
  if (state >= num_states) throw InvalidBelief("point mass out of range");
  std::vector<double> probs(num_states, 0.0);
  probs[state] = 1.0;
  return Belief(std::move(probs));
}

Belief Belief::uniform_over(std::size_t num_states,
                            std::span<const StateIndex> support) {
  if (support.empty()) throw InvalidBelief("empty support");
  std::vector<double> probs(num_states, 0.0);
  const double p = 1.0 / static_cast<double>(support.size());
  for (StateIndex s : support) {
    if (s >= num_states) throw InvalidBelief("support index out of range");
    probs[s] = p;
  }
  return Belief(std::move(probs));
}

Belief Belief::normalize(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidBelief("negative belief weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidBelief("belief weights sum to zero");
  const double inv = 1.0 / sum;
  for (double& w : weights) w *= inv;
  Belief b;
  b.probs_ = std::move(weights);
  return b;
}

PomdpModel::PomdpModel(ModelTables tables)
    : num_states_(tables.num_states),
      num_actions_(tables.num_actions),
      num_observations_(tables.num_observations),
      discount_(tables.discount),
      initial_belief_(std::move(tables.initial_belief)),
      observations_(std::move(tables.observations)),
      rewards_(std::move(tables.rewards)) {
  if (num_states_ == 0 || num_actions_ == 0 || num_observations_ == 0) {
    throw InvalidModel("model dimensions must be positive");
  }
  if (!(discount_ > 0.0 && discount_ < 1.0)) {
    throw InvalidModel("discount must lie in (0, 1)");
  }
  if (tables.transitions.size() != num_states_ * num_actions_) {
    throw InvalidModel("transition table has wrong number of rows");
  }
  if (observations_.size() != num_states_ * num_observations_) {
    throw InvalidModel("observation table has wrong size");
  }
  if (rewards_.size() != num_states_ * num_actions_) {
    throw InvalidModel("reward table has wrong size");
  }
  if (initial_belief_.size() != num_states_) {
    throw InvalidModel("initial belief has wrong dimension");
  }

  transition_offsets_.reserve(num_states_ * num_actions_ + 1);
  transition_offsets_.push_back(0);
  for (std::size_t row = 0; row < tables.transitions.size(); ++row) {
    auto& entries = tables.transitions[row];
    std::sort(entries.begin(), entries.end(),
              [](const Transition& l, const Transition& r) {
                return l.next < r.next;
              });
    const std::size_t begin = transition_entries_.size();
    double sum = 0.0;
    for (const Transition& t : entries) {
      if (t.next >= num_states_) throw InvalidModel("successor out of range");
      if (!(t.prob >= 0.0)) throw InvalidModel("negative transition entry");
      sum += t.prob;
      if (t.prob == 0.0) continue;
      if (transition_entries_.size() > begin &&
          transition_entries_.back().next == t.next) {
        transition_entries_.back().prob += t.prob;
      } else {
        transition_entries_.push_back(t);
      }
    }
    check_stochastic_row(
        sum,
        "transition row (" + std::to_string(row / num_actions_) + ", " +
            std::to_string(row % num_actions_) + ")",
        [&](double s) {
          for (std::size_t i = begin; i < transition_entries_.size(); ++i) {
            transition_entries_[i].prob *= s;
          }
        });
    transition_offsets_.push_back(transition_entries_.size());
  }

  observation_offsets_.reserve(num_states_ + 1);
  observation_offsets_.push_back(0);
  for (StateIndex x = 0; x < num_states_; ++x) {
    double* row = observations_.data() + x * num_observations_;
    double sum = 0.0;
    for (std::size_t z = 0; z < num_observations_; ++z) {
      if (!(row[z] >= 0.0)) throw InvalidModel("negative observation entry");
      sum += row[z];
    }
    check_stochastic_row(sum, "observation row " + std::to_string(x),
                         [&](double s) {
                           for (std::size_t z = 0; z < num_observations_; ++z)
                             row[z] *= s;
                         });
    for (std::size_t z = 0; z < num_observations_; ++z) {
      if (row[z] > 0.0) observation_entries_.push_back({z, row[z]});
    }
    observation_offsets_.push_back(observation_entries_.size());
  }

  for (double r : rewards_) {
    if (!std::isfinite(r)) throw InvalidModel("non-finite reward");
  }
  min_reward_ = *std::min_element(rewards_.begin(), rewards_.end());
  max_reward_ = *std::max_element(rewards_.begin(), rewards_.end());

  std::map<std::vector<double>, std::size_t> classes;
  state_class_.resize(num_states_);
  for (StateIndex x = 0; x < num_states_; ++x) {
    auto row = observation_row(x);
    std::vector<double> key(row.begin(), row.end());
    auto [it, inserted] = classes.emplace(std::move(key), class_rows_.size());
    if (inserted) class_rows_.push_back(x);
    state_class_[x] = it->second;
  }
}

std::uint64_t PomdpModel::content_hash() const {
  Fnv1a h;
  h.u64(num_states_);
  h.u64(num_actions_);
  h.u64(num_observations_);
  h.f64(discount_);
  for (std::size_t off : transition_offsets_) h.u64(off);
  for (const Transition& t : transition_entries_) {
    h.u64(t.next);
    h.f64(t.prob);
  }
  for (double o : observations_) h.f64(o);
  for (double r : rewards_) h.f64(r);
  for (double p : initial_belief_.probs()) h.f64(p);
  return h.value();
}

std::vector<double> predict(const PomdpModel& model, const Belief& b,
                            ActionIndex a) {
  std::vector<double> out(model.num_states(), 0.0);
  for (StateIndex x = 0; x < model.num_states(); ++x) {
    const double bx = b[x];
    if (bx == 0.0) continue;
    for (const Transition& t : model.transitions(x, a)) {
      out[t.next] += t.prob * bx;
    }
  }
  return out;
}

double obs_marginal(const PomdpModel& model, const Belief& b, ActionIndex a,
                    ObservationIndex z) {
  const std::vector<double> pred = predict(model, b, a);
  double total = 0.0;
  for (StateIndex x = 0; x < model.num_states(); ++x) {
    if (pred[x] != 0.0) total += model.observation(x, z) * pred[x];
  }
  return total;
}

std::vector<double> obs_marginals(const PomdpModel& model, const Belief& b,
                                  ActionIndex a) {
  const std::vector<double> pred = predict(model, b, a);
  std::vector<double> out(model.num_observations(), 0.0);
  for (StateIndex x = 0; x < model.num_states(); ++x) {
    if (pred[x] == 0.0) continue;
    for (const ObservationEntry& e : model.observation_support(x)) {
      out[e.observation] += e.prob * pred[x];
    }
  }
  return out;
}

Belief belief_update_from_prediction(const PomdpModel& model,
                                     std::span<const double> prediction,
                                     ActionIndex a, ObservationIndex z) {
  std::vector<double> posterior(model.num_states(), 0.0);
  double normalizer = 0.0;
  for (StateIndex x = 0; x < model.num_states(); ++x) {
    if (prediction[x] == 0.0) continue;
    const double w = model.observation(x, z) * prediction[x];
    posterior[x] = w;
    normalizer += w;
  }
  if (!(normalizer > kZeroLikelihood)) {
    throw ZeroLikelihoodObservation(a, z, normalizer);
  }
  return Belief::normalize(std::move(posterior));
}

Belief belief_update(const PomdpModel& model, const Belief& b, ActionIndex a,
                     ObservationIndex z) {
  if (a >= model.num_actions() || z >= model.num_observations()) {
    throw InvalidArgument("belief_update: index out of range");
  }
  const std::vector<double> pred = predict(model, b, a);
  return belief_update_from_prediction(model, pred, a, z);
}

double belief_reward(const PomdpModel& model, const Belief& b, ActionIndex a) {
  double total = 0.0;
  for (StateIndex x = 0; x < model.num_states(); ++x) {
    if (b[x] != 0.0) total += model.reward(x, a) * b[x];
  }
  return total;
}

AlphaSet::AlphaSet(std::size_t dimension, std::vector<AlphaVector> vectors)
    : dimension_(dimension), vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw InvalidArgument("AlphaSet must be non-empty");
  for (const AlphaVector& v : vectors_) {
    if (v.values.size() != dimension_) {
      throw InvalidArgument("alpha-vector dimension mismatch");
    }
  }
}

std::vector<StateIndex> belief_support(const Belief& b) {
  std::vector<StateIndex> support;
  for (StateIndex x = 0; x < b.size(); ++x) {
    if (b[x] > 0.0) support.push_back(x);
  }
  return support;
}

AlphaValue alpha_value(const Belief& b, const AlphaSet& set) {
  if (b.size() != set.dimension()) {
    throw InvalidArgument("alpha_value: dimension mismatch");
  }
  const auto probs = b.probs();
  const std::vector<StateIndex> support = belief_support(b);
  // Sparse beliefs are common once the robot localizes; gather once and
  // reuse the index list for every vector.
  const bool sparse = support.size() * 2 < probs.size();
  AlphaValue best{0.0, 0, 0};
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::vector<double>& alpha = set[i].values;
    double v = 0.0;
    if (sparse) {
      for (StateIndex x : support) v += alpha[x] * probs[x];
    } else {
      for (std::size_t x = 0; x < probs.size(); ++x) v += alpha[x] * probs[x];
    }
    if (i == 0 || v > best.value) best = {v, set[i].action, i};
  }
  return best;
}

}  // namespace qvts

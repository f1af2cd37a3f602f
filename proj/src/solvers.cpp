#include "qvts/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace qvts {

void SolverConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (max_iterations == 0) throw InvalidArgument("max_iterations must be >= 1");
  if (pbvi_target_size == 0) {
    throw InvalidArgument("pbvi_target_size must be >= 1");
  }
}

namespace {

AlphaSet to_alpha_set(std::size_t num_states, std::size_t num_actions,
                      const std::vector<double>& state_major) {
  std::vector<AlphaVector> vectors(num_actions);
  for (ActionIndex a = 0; a < num_actions; ++a) {
    vectors[a].action = a;
    vectors[a].values.resize(num_states);
    for (StateIndex x = 0; x < num_states; ++x) {
      vectors[a].values[x] = state_major[x * num_actions + a];
    }
  }
  return AlphaSet(num_states, std::move(vectors));
}

}  // namespace

FibResult solve_fib(const PomdpModel& model, const SolverConfig& config,
                    const SweepObserver& observer) {
  config.validate();
  const std::size_t n = model.num_states();
  const std::size_t na = model.num_actions();
  const std::size_t nz = model.num_observations();
  const double gamma = model.discount();

  // alpha[x * |A| + a]: state-major so the inner max over a' is contiguous.
  std::vector<double> alpha(n * na, model.max_reward() / (1.0 - gamma));
  std::vector<double> next(n * na);
  std::vector<double> acc(nz * na, 0.0);
  std::vector<std::uint8_t> seen(nz, 0);
  std::vector<ObservationIndex> touched;
  touched.reserve(nz);

  FibResult result{to_alpha_set(n, na, alpha), 0, 0.0, false};
  for (std::size_t sweep = 1; sweep <= config.max_iterations; ++sweep) {
    double residual = 0.0;
    for (StateIndex x = 0; x < n; ++x) {
      for (ActionIndex a = 0; a < na; ++a) {
        touched.clear();
        for (const Transition& t : model.transitions(x, a)) {
          const double* succ = alpha.data() + t.next * na;
          for (const ObservationEntry& e : model.observation_support(t.next)) {
            double* row = acc.data() + e.observation * na;
            if (!seen[e.observation]) {
              seen[e.observation] = 1;
              touched.push_back(e.observation);
              std::fill(row, row + na, 0.0);
            }
            const double w = e.prob * t.prob;
            for (ActionIndex b = 0; b < na; ++b) row[b] += w * succ[b];
          }
        }
        double future = 0.0;
        for (ObservationIndex z : touched) {
          const double* row = acc.data() + z * na;
          future += *std::max_element(row, row + na);
          seen[z] = 0;
        }
        const double v = model.reward(x, a) + gamma * future;
        residual = std::max(residual, std::abs(v - alpha[x * na + a]));
        next[x * na + a] = v;
      }
    }
    alpha.swap(next);
    result.iterations = sweep;
    result.residual = residual;
    if (observer) observer(sweep, to_alpha_set(n, na, alpha));
    if (residual < config.epsilon) {
      result.converged = true;
      break;
    }
  }
  result.alphas = to_alpha_set(n, na, alpha);
  return result;
}

AlphaSet blind_lower_bound(const PomdpModel& model) {
  AlphaVector v;
  v.values.assign(model.num_states(),
                  model.min_reward() / (1.0 - model.discount()));
  v.action = 0;
  return AlphaSet(model.num_states(), {std::move(v)});
}

namespace {

// Reusable buffers for point backups; one instance per solver call. The
// alpha-set is copied state-major (row x holds alpha_j(x) for every j), so
// the per-class contraction is a contiguous multiply-add across vectors.
class BackupWorkspace {
 public:
  explicit BackupWorkspace(const PomdpModel& model)
      : model_(model),
        prediction_(model.num_states(), 0.0),
        class_seen_(model.num_observation_classes(), 0) {
    representatives_.assign(model.num_observation_classes(), model.num_states());
    for (StateIndex x = 0; x < model.num_states(); ++x) {
      auto& r = representatives_[model.observation_class(x)];
      if (r == model.num_states()) r = x;
    }
  }

  void load(const AlphaSet& set) {
    set_ = &set;
    count_ = set.size();
    const std::size_t n = model_.num_states();
    matrix_.resize(n * count_);
    for (std::size_t j = 0; j < count_; ++j) {
      const std::vector<double>& v = set[j].values;
      for (StateIndex x = 0; x < n; ++x) matrix_[x * count_ + j] = v[x];
    }
    class_sums_.assign(model_.num_observation_classes() * count_, 0.0);
    z_values_.assign(count_, 0.0);
  }

  AlphaVector backup(const Belief& b) {
    const std::size_t na = model_.num_actions();
    const std::size_t nz = model_.num_observations();
    const double gamma = model_.discount();
    const std::vector<StateIndex> support = belief_support(b);

    double best_value = -std::numeric_limits<double>::infinity();
    ActionIndex best_action = 0;
    std::vector<std::size_t> best_choice(nz, 0);
    std::vector<std::size_t> choice(nz, 0);

    for (ActionIndex a = 0; a < na; ++a) {
      predict_into(support, b, a);
      contract_classes();
      double future = 0.0;
      for (ObservationIndex z = 0; z < nz; ++z) {
        std::fill(z_values_.begin(), z_values_.end(), 0.0);
        for (std::size_t c : active_classes_) {
          const double o = model_.observation(representatives_[c], z);
          if (o == 0.0) continue;
          const double* g = class_sums_.data() + c * count_;
          for (std::size_t j = 0; j < count_; ++j) z_values_[j] += o * g[j];
        }
        std::size_t arg = 0;
        for (std::size_t j = 1; j < count_; ++j) {
          if (z_values_[j] > z_values_[arg]) arg = j;
        }
        choice[z] = arg;
        future += z_values_[arg];
      }
      double value = 0.0;
      for (StateIndex x : support) value += model_.reward(x, a) * b[x];
      value += gamma * future;
      if (value > best_value) {
        best_value = value;
        best_action = a;
        best_choice = choice;
      }
      clear();
    }
    return build_vector(best_action, best_choice);
  }

 private:
  void predict_into(const std::vector<StateIndex>& support, const Belief& b,
                    ActionIndex a) {
    for (StateIndex x : support) {
      for (const Transition& t : model_.transitions(x, a)) {
        if (prediction_[t.next] == 0.0) touched_.push_back(t.next);
        prediction_[t.next] += t.prob * b[x];
      }
    }
  }

  // class_sums_[c][j] = sum over touched x' in class c of tau(x') alpha_j(x').
  void contract_classes() {
    for (StateIndex x : touched_) {
      const std::size_t c = model_.observation_class(x);
      double* g = class_sums_.data() + c * count_;
      if (!class_seen_[c]) {
        class_seen_[c] = 1;
        active_classes_.push_back(c);
        std::fill(g, g + count_, 0.0);
      }
      const double p = prediction_[x];
      const double* row = matrix_.data() + x * count_;
      for (std::size_t j = 0; j < count_; ++j) g[j] += p * row[j];
    }
  }

  void clear() {
    for (StateIndex x : touched_) prediction_[x] = 0.0;
    touched_.clear();
    for (std::size_t c : active_classes_) class_seen_[c] = 0;
    active_classes_.clear();
  }

  AlphaVector build_vector(ActionIndex a, const std::vector<std::size_t>& choice) {
    const AlphaSet& set = *set_;
    const std::size_t n = model_.num_states();
    const double gamma = model_.discount();
    // h(x') = sum_z O(x', z) alpha_{choice(z)}(x')
    std::vector<double> h(n, 0.0);
    for (StateIndex x = 0; x < n; ++x) {
      double s = 0.0;
      for (const ObservationEntry& e : model_.observation_support(x)) {
        s += e.prob * set[choice[e.observation]].values[x];
      }
      h[x] = s;
    }
    AlphaVector out;
    out.action = a;
    out.values.resize(n);
    for (StateIndex x = 0; x < n; ++x) {
      double s = 0.0;
      for (const Transition& t : model_.transitions(x, a)) s += t.prob * h[t.next];
      out.values[x] = model_.reward(x, a) + gamma * s;
    }
    return out;
  }

  const PomdpModel& model_;
  const AlphaSet* set_ = nullptr;
  std::size_t count_ = 0;
  std::vector<double> matrix_;
  std::vector<double> prediction_;
  std::vector<StateIndex> touched_;
  std::vector<double> class_sums_;
  std::vector<std::uint8_t> class_seen_;
  std::vector<std::size_t> active_classes_;
  std::vector<double> z_values_;
  std::vector<StateIndex> representatives_;
};

// Distinct vectors of a set, preserving first-occurrence order. Points often
// share a backed-up vector; argmax work only needs each once.
AlphaSet unique_vectors(const AlphaSet& set) {
  std::map<std::vector<double>, ActionIndex> seen;
  std::vector<AlphaVector> unique;
  for (const AlphaVector& v : set) {
    if (seen.emplace(v.values, v.action).second) unique.push_back(v);
  }
  return AlphaSet(set.dimension(), std::move(unique));
}

double l1_distance(const Belief& l, const Belief& r) {
  double d = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) d += std::abs(l[i] - r[i]);
  return d;
}

}  // namespace

AlphaVector point_backup(const PomdpModel& model, const AlphaSet& set,
                         const Belief& b) {
  BackupWorkspace ws(model);
  ws.load(set);
  return ws.backup(b);
}

AlphaSet solve_pbvi(const PomdpModel& model, std::span<const Belief> beliefs,
                    const SolverConfig& config, const SweepObserver& observer) {
  if (beliefs.empty()) throw InvalidArgument("PBVI belief set is empty");
  if (std::find(beliefs.begin(), beliefs.end(), model.initial_belief()) ==
      beliefs.end()) {
    throw InvalidArgument("PBVI belief set must contain b0");
  }
  BackupWorkspace ws(model);
  AlphaSet set = blind_lower_bound(model);
  for (std::size_t sweep = 1; sweep <= config.pbvi_sweeps; ++sweep) {
    const AlphaSet distinct = unique_vectors(set);
    ws.load(distinct);
    std::vector<AlphaVector> next;
    next.reserve(beliefs.size());
    for (const Belief& b : beliefs) next.push_back(ws.backup(b));
    set = AlphaSet(model.num_states(), std::move(next));
    if (observer) observer(sweep, set);
  }
  return set;
}

std::vector<Belief> expand_belief_set(const PomdpModel& model,
                                      std::span<const Belief> current,
                                      Rng& rng) {
  if (current.empty()) throw InvalidArgument("cannot expand an empty set");
  std::vector<Belief> result(current.begin(), current.end());
  std::vector<double> successor;
  for (const Belief& b : current) {
    const DiscreteSampler state_sampler(b.probs());
    double best_distance = 0.0;
    const Belief* best = nullptr;
    Belief candidate_storage;
    for (ActionIndex a = 0; a < model.num_actions(); ++a) {
      const StateIndex x = state_sampler.sample(uniform01(rng));
      const auto row = model.transitions(x, a);
      successor.clear();
      for (const Transition& t : row) successor.push_back(t.prob);
      const StateIndex next =
          row[sample_index(successor, uniform01(rng))].next;
      const ObservationIndex z =
          sample_index(model.observation_row(next), uniform01(rng));
      Belief candidate = belief_update(model, b, a, z);
      double distance = std::numeric_limits<double>::infinity();
      for (const Belief& p : result) {
        distance = std::min(distance, l1_distance(candidate, p));
        if (distance <= best_distance) break;
      }
      if (distance > best_distance) {
        best_distance = distance;
        candidate_storage = std::move(candidate);
        best = &candidate_storage;
      }
    }
    if (best != nullptr) result.push_back(*best);
  }
  return result;
}

std::vector<Belief> build_belief_set(const PomdpModel& model,
                                     const SolverConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);
  std::vector<Belief> set{model.initial_belief()};
  while (set.size() < config.pbvi_target_size) {
    std::vector<Belief> grown = expand_belief_set(model, set, rng);
    if (grown.size() == set.size()) break;
    set = std::move(grown);
  }
  if (set.size() > config.pbvi_target_size) set.resize(config.pbvi_target_size);
  return set;
}

double mdp_q_value(const PomdpModel& model, std::span<const double> values,
                   StateIndex x, ActionIndex a) {
  double future = 0.0;
  for (const Transition& t : model.transitions(x, a)) {
    future += t.prob * values[t.next];
  }
  return model.reward(x, a) + model.discount() * future;
}

MdpSolution solve_mdp(const PomdpModel& model, const SolverConfig& config) {
  config.validate();
  const std::size_t n = model.num_states();
  MdpSolution out;
  out.values.assign(n, model.max_reward() / (1.0 - model.discount()));
  std::vector<double> next(n);
  for (std::size_t sweep = 1; sweep <= config.max_iterations; ++sweep) {
    double residual = 0.0;
    for (StateIndex x = 0; x < n; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionIndex a = 0; a < model.num_actions(); ++a) {
        best = std::max(best, mdp_q_value(model, out.values, x, a));
      }
      residual = std::max(residual, std::abs(best - out.values[x]));
      next[x] = best;
    }
    out.values.swap(next);
    out.iterations = sweep;
    out.residual = residual;
    if (residual < config.epsilon) {
      out.converged = true;
      break;
    }
  }
  out.policy.assign(n, 0);
  for (StateIndex x = 0; x < n; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < model.num_actions(); ++a) {
      const double q = mdp_q_value(model, out.values, x, a);
      if (q > best) {
        best = q;
        out.policy[x] = a;
      }
    }
  }
  return out;
}

}  // namespace qvts

#include <algorithm>
#include <cmath>
#include <limits>

#include "qvts/solvers.hpp"

namespace qvts {

namespace {

// Depth-limited Bellman recursion over unnormalized beliefs. V_d is
// positively homogeneous, so P(z | b, a) * V_d(Phi(b, a, z)) equals V_d of
// the unnormalized posterior and no division is needed. The last two layers
// are closed-form: V_1(w) = max_a R_a . w and
// V_2(w) = max_a [R_a . w + gamma sum_z max_a' g(a, z, a') . w] with
// g(a, z, a')(x) = sum_x' T(x, a, x') O(x', z) R(x', a').
class Enumerator {
 public:
  Enumerator(const PomdpModel& model, std::size_t depth)
      : model_(model),
        n_(model.num_states()),
        na_(model.num_actions()),
        nz_(model.num_observations()),
        gamma_(model.discount()),
        rewards_(na_ * n_),
        g_(na_ * nz_ * na_ * n_, 0.0),
        scratch_(depth + 1, std::vector<double>(2 * n_)) {
    for (ActionIndex a = 0; a < na_; ++a) {
      for (StateIndex x = 0; x < n_; ++x) rewards_[a * n_ + x] = model.reward(x, a);
    }
    for (ActionIndex a = 0; a < na_; ++a) {
      for (ObservationIndex z = 0; z < nz_; ++z) {
        for (ActionIndex b = 0; b < na_; ++b) {
          double* g = g_.data() + ((a * nz_ + z) * na_ + b) * n_;
          for (StateIndex x = 0; x < n_; ++x) {
            double s = 0.0;
            for (const Transition& t : model.transitions(x, a)) {
              s += t.prob * model.observation(t.next, z) * model.reward(t.next, b);
            }
            g[x] = s;
          }
        }
      }
    }
  }

  double value(const double* w, std::size_t depth) {
    if (depth == 0) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < na_; ++a) best = std::max(best, q_value(w, a, depth));
    return best;
  }

  double q_value(const double* w, ActionIndex a, std::size_t depth) {
    double v = dot(rewards_.data() + a * n_, w);
    if (depth == 1) return v;
    double future = 0.0;
    if (depth == 2) {
      for (ObservationIndex z = 0; z < nz_; ++z) {
        const double* g = g_.data() + (a * nz_ + z) * na_ * n_;
        double m = dot(g, w);
        for (ActionIndex b = 1; b < na_; ++b) m = std::max(m, dot(g + b * n_, w));
        future += m;
      }
      return v + gamma_ * future;
    }
    double* tau = scratch_[depth].data();
    double* child = tau + n_;
    std::fill(tau, tau + n_, 0.0);
    for (StateIndex x = 0; x < n_; ++x) {
      if (w[x] == 0.0) continue;
      for (const Transition& t : model_.transitions(x, a)) tau[t.next] += t.prob * w[x];
    }
    for (ObservationIndex z = 0; z < nz_; ++z) {
      double mass = 0.0;
      for (StateIndex x = 0; x < n_; ++x) {
        child[x] = model_.observation(x, z) * tau[x];
        mass += child[x];
      }
      if (mass == 0.0) continue;
      future += value(child, depth - 1);
    }
    return v + gamma_ * future;
  }

 private:
  double dot(const double* l, const double* r) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += l[i] * r[i];
    return s;
  }

  const PomdpModel& model_;
  std::size_t n_;
  std::size_t na_;
  std::size_t nz_;
  double gamma_;
  std::vector<double> rewards_;
  std::vector<double> g_;
  std::vector<std::vector<double>> scratch_;
};

void check_guard(const PomdpModel& model, std::size_t depth) {
  if (model.num_actions() * model.num_observations() > kExactMaxBranching ||
      depth > kExactMaxDepth) {
    throw TooLarge("exact enumeration needs |A|*|Z| <= 12 and depth <= 8");
  }
}

ValueInterval widen(const PomdpModel& model, double truncated,
                    std::size_t depth) {
  const double gamma = model.discount();
  const double tail = std::pow(gamma, static_cast<double>(depth)) / (1.0 - gamma);
  return {truncated + tail * model.min_reward(),
          truncated + tail * model.max_reward()};
}

}  // namespace

ValueInterval exact_value_bounded(const PomdpModel& model, const Belief& b,
                                  std::size_t depth) {
  check_guard(model, depth);
  Enumerator e(model, depth);
  return widen(model, e.value(b.probs().data(), depth), depth);
}

std::vector<ValueInterval> exact_action_values(const PomdpModel& model,
                                               const Belief& b,
                                               std::size_t depth) {
  check_guard(model, depth);
  if (depth == 0) throw InvalidArgument("action values need depth >= 1");
  Enumerator e(model, depth);
  std::vector<ValueInterval> out;
  for (ActionIndex a = 0; a < model.num_actions(); ++a) {
    out.push_back(widen(model, e.q_value(b.probs().data(), a, depth), depth));
  }
  return out;
}

}  // namespace qvts

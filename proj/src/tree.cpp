#include "qvts/tree.hpp"

#include <algorithm>
#include <map>

namespace qvts {

namespace {

StateIndex sample_successor(std::span<const Transition> row, double u) {
  double acc = 0.0;
  for (const Transition& t : row) {
    acc += t.prob;
    if (u < acc) return t.next;
  }
  return row.back().next;
}

ObservationIndex sample_observation(std::span<const ObservationEntry> row,
                                    double u) {
  double acc = 0.0;
  for (const ObservationEntry& e : row) {
    acc += e.prob;
    if (u < acc) return e.observation;
  }
  return row.back().observation;
}

}  // namespace

// Leaf bounds for every observation branch of a Q-node at once. States with
// identical observation rows are pooled first, so the cost per Q-node is one
// pass over the predicted support plus |classes| x |Z| small vector updates.
class QvTree::BranchEvaluator {
 public:
  BranchEvaluator(const PomdpModel& model, const AlphaSet& set)
      : model_(model),
        representatives_(model.num_observation_classes(), model.num_states()),
        seen_(model.num_observation_classes(), 0) {
    std::map<std::vector<double>, int> distinct;
    std::vector<const AlphaVector*> kept;
    for (const AlphaVector& v : set) {
      if (distinct.emplace(v.values, 0).second) kept.push_back(&v);
    }
    count_ = kept.size();
    matrix_.resize(model.num_states() * count_);
    for (std::size_t j = 0; j < count_; ++j) {
      for (StateIndex x = 0; x < model.num_states(); ++x) {
        matrix_[x * count_ + j] = kept[j]->values[x];
      }
    }
    for (StateIndex x = 0; x < model.num_states(); ++x) {
      auto& r = representatives_[model.observation_class(x)];
      if (r == model.num_states()) r = x;
    }
    sums_.assign(model.num_observation_classes() * count_, 0.0);
    mass_.assign(model.num_observation_classes(), 0.0);
    scratch_.assign(count_, 0.0);
  }

  // out[i] = max_j alpha_j . Phi(b, a, zs[i]) given the prediction tau.
  void evaluate(const std::vector<double>& tau,
                std::span<const ObservationIndex> zs, std::vector<double>& out) {
    active_.clear();
    for (StateIndex x = 0; x < tau.size(); ++x) {
      const double p = tau[x];
      if (p == 0.0) continue;
      const std::size_t c = model_.observation_class(x);
      double* g = sums_.data() + c * count_;
      if (!seen_[c]) {
        seen_[c] = 1;
        active_.push_back(c);
        std::fill(g, g + count_, 0.0);
        mass_[c] = 0.0;
      }
      mass_[c] += p;
      const double* row = matrix_.data() + x * count_;
      for (std::size_t j = 0; j < count_; ++j) g[j] += p * row[j];
    }
    out.resize(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
      std::fill(scratch_.begin(), scratch_.end(), 0.0);
      double likelihood = 0.0;
      for (std::size_t c : active_) {
        const double o = model_.observation(representatives_[c], zs[i]);
        if (o == 0.0) continue;
        likelihood += o * mass_[c];
        const double* g = sums_.data() + c * count_;
        for (std::size_t j = 0; j < count_; ++j) scratch_[j] += o * g[j];
      }
      out[i] = *std::max_element(scratch_.begin(), scratch_.end()) / likelihood;
    }
    for (std::size_t c : active_) seen_[c] = 0;
  }

 private:
  const PomdpModel& model_;
  std::size_t count_ = 0;
  std::vector<double> matrix_;
  std::vector<StateIndex> representatives_;
  std::vector<std::uint8_t> seen_;
  std::vector<std::size_t> active_;
  std::vector<double> sums_;
  std::vector<double> mass_;
  std::vector<double> scratch_;
};

NodeBounds combine_branches(double reward, double discount,
                            std::span<const WeightedBounds> branches,
                            std::size_t* selected) {
  if (branches.empty()) throw InvalidArgument("combine_branches needs a branch");
  double upper = 0.0;
  double lower = 0.0;
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const WeightedBounds& c = branches[i];
    upper += c.weight * c.bounds.upper;
    lower += c.weight * c.bounds.lower;
    const double score = c.weight * c.bounds.heuristic;
    if (i == 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  if (selected != nullptr) *selected = best;
  return {reward + discount * upper, reward + discount * lower,
          discount * best_score};
}

NodeBounds combine_actions(std::span<const NodeBounds> children,
                           std::size_t* selected) {
  if (children.empty()) throw InvalidArgument("combine_actions needs a child");
  std::size_t best = 0;
  double lower = children.front().lower;
  for (std::size_t i = 1; i < children.size(); ++i) {
    if (children[i].upper > children[best].upper) best = i;
    lower = std::max(lower, children[i].lower);
  }
  if (selected != nullptr) *selected = best;
  return {children[best].upper, lower, children[best].heuristic};
}

std::vector<ObservationIndex> forward_sampling(const PomdpModel& model,
                                               const Belief& b, ActionIndex a,
                                               std::size_t n,
                                               std::uint64_t key) {
  if (n == 0) throw InvalidArgument("forward_sampling needs n >= 1");
  if (a >= model.num_actions()) throw InvalidArgument("action out of range");
  const DiscreteSampler state_sampler(b.probs());
  std::vector<ObservationIndex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CounterStream stream(key, i);
    const StateIndex x = state_sampler.sample(stream.uniform(0));
    const StateIndex next = sample_successor(model.transitions(x, a), stream.uniform(1));
    out[i] = sample_observation(model.observation_support(next), stream.uniform(2));
  }
  return out;
}

QvTree::QvTree(const PomdpModel& model, const AlphaSet& upper_bound,
               const AlphaSet& lower_bound, const Belief& root_belief,
               const TreeConfig& config)
    : model_(model),
      upper_bound_(upper_bound),
      lower_bound_(lower_bound),
      config_(config),
      rng_(config.seed),
      upper_eval_(std::make_unique<BranchEvaluator>(model, upper_bound)),
      lower_eval_(std::make_unique<BranchEvaluator>(model, lower_bound)) {
  if (upper_bound.dimension() != model.num_states() ||
      lower_bound.dimension() != model.num_states()) {
    throw InvalidArgument("bound dimension does not match the model");
  }
  if (root_belief.size() != model.num_states()) {
    throw InvalidBelief("root belief size does not match the model");
  }
  if (config.samples_per_qnode == 0) {
    throw InvalidArgument("samples_per_qnode must be positive");
  }
  root_ = make_leaf(root_belief, 0, 1.0, nullptr);
  num_vnodes_ = 1;
}

QvTree::~QvTree() = default;

std::unique_ptr<VNode> QvTree::make_leaf(Belief belief, ObservationIndex z,
                                         double weight, QNode* parent) const {
  const double upper = alpha_value(belief, upper_bound_).value;
  const double lower = alpha_value(belief, lower_bound_).value;
  return make_leaf(std::move(belief), z, weight, parent, upper, lower);
}

std::unique_ptr<VNode> QvTree::make_leaf(Belief belief, ObservationIndex z,
                                         double weight, QNode* parent,
                                         double upper, double lower) const {
  auto v = std::make_unique<VNode>();
  v->upper_ = upper;
  v->lower_ = lower;
  v->heuristic_ = v->upper_ - v->lower_;
  v->expand_ = v.get();
  v->belief_ = std::move(belief);
  v->observation_ = z;
  v->weight_ = weight;
  v->parent_ = parent;
  return v;
}

std::unique_ptr<QNode> QvTree::construct_qnode(VNode& parent, ActionIndex a) {
  auto q = std::make_unique<QNode>();
  q->action_ = a;
  q->parent_ = &parent;
  const Belief& b = parent.belief_;
  q->reward_ = belief_reward(model_, b, a);
  const std::vector<double> prediction = predict(model_, b, a);

  std::vector<ObservationIndex> zs;
  std::vector<double> weights;
  if (config_.expansion_mode == ExpansionMode::kExact) {
    const std::vector<double> marginals = obs_marginals(model_, b, a);
    for (ObservationIndex z = 0; z < marginals.size(); ++z) {
      if (marginals[z] <= 0.0) continue;
      zs.push_back(z);
      weights.push_back(marginals[z]);
    }
  } else {
    const std::size_t n = config_.samples_per_qnode;
    const std::vector<ObservationIndex> samples =
        forward_sampling(model_, b, a, n, rng_());
    std::map<ObservationIndex, std::size_t> counts;
    for (ObservationIndex z : samples) ++counts[z];
    for (const auto& [z, f] : counts) {
      zs.push_back(z);
      weights.push_back(static_cast<double>(f) / static_cast<double>(n));
    }
  }
  std::vector<double> upper, lower;
  upper_eval_->evaluate(prediction, zs, upper);
  lower_eval_->evaluate(prediction, zs, lower);
  q->children_.reserve(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    q->children_.push_back(make_leaf(
        belief_update_from_prediction(model_, prediction, a, zs[i]), zs[i],
        weights[i], q.get(), upper[i], lower[i]));
  }
  num_vnodes_ += q->children_.size();
  update_qnode(*q);
  return q;
}

void QvTree::update_qnode(QNode& q) const {
  std::vector<WeightedBounds> branches;
  branches.reserve(q.children_.size());
  for (const auto& child : q.children_) {
    branches.push_back({child->weight_, {child->upper_, child->lower_, child->heuristic_}});
  }
  std::size_t best = 0;
  const NodeBounds nb = combine_branches(q.reward_, model_.discount(), branches, &best);
  q.upper_ = nb.upper;
  q.lower_ = nb.lower;
  q.heuristic_ = nb.heuristic;
  q.expand_ = q.children_[best]->expand_;
}

void QvTree::update_vnode(VNode& v) const {
  std::vector<NodeBounds> children;
  children.reserve(v.children_.size());
  for (const auto& q : v.children_) {
    children.push_back({q->upper_, q->lower_, q->heuristic_});
  }
  std::size_t best = 0;
  const NodeBounds nb = combine_actions(children, &best);
  v.upper_ = nb.upper;
  v.lower_ = nb.lower;
  v.heuristic_ = nb.heuristic;
  v.expand_ = v.children_[best]->expand_;
}

void QvTree::expand_vnode(VNode& v) {
  if (!v.is_leaf()) throw AlreadyExpanded("V-node already has children");
  v.children_.reserve(model_.num_actions());
  for (ActionIndex a = 0; a < model_.num_actions(); ++a) {
    v.children_.push_back(construct_qnode(v, a));
  }
  update_vnode(v);
}

void QvTree::backup(VNode& v) {
  for (QNode* q = v.parent_; q != nullptr; q = q->parent_->parent_) {
    update_qnode(*q);
    update_vnode(*q->parent_);
  }
}

VNode& QvTree::expand_once() {
  VNode& v = *find_vnode_to_expand();
  expand_vnode(v);
  backup(v);
  return v;
}

ActionIndex QvTree::plan(PlanStats* stats) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };
  std::size_t expansions = 0;
  while (true) {
    if (root_->upper_ - root_->lower_ < config_.gap_tolerance) break;
    if (num_vnodes_ >= config_.node_cap) break;
    if (config_.max_expansions > 0 && expansions >= config_.max_expansions) break;
    if (config_.time_budget_ms > 0.0 && elapsed_ms() >= config_.time_budget_ms) break;
    expand_once();
    ++expansions;
  }
  const ActionIndex action = optimal_action();
  if (stats != nullptr) {
    stats->expansions = expansions;
    stats->tree_size = num_vnodes_;
    stats->elapsed_ms = elapsed_ms();
    stats->root_upper = root_->upper_;
    stats->root_lower = root_->lower_;
  }
  return action;
}

ActionIndex QvTree::optimal_action() const {
  const bool by_lower = config_.action_rule == ActionRule::kMaxLower;
  if (root_->is_leaf()) {
    return alpha_value(root_->belief_, by_lower ? lower_bound_ : upper_bound_).action;
  }
  const QNode* best = nullptr;
  for (const auto& q : root_->children_) {
    if (best == nullptr) {
      best = q.get();
      continue;
    }
    const double primary = by_lower ? q->lower_ : q->upper_;
    const double best_primary = by_lower ? best->lower_ : best->upper_;
    const double secondary = by_lower ? q->upper_ : q->lower_;
    const double best_secondary = by_lower ? best->upper_ : best->lower_;
    if (primary > best_primary ||
        (primary == best_primary && secondary > best_secondary)) {
      best = q.get();
    }
  }
  return best->action_;
}

void QvTree::advance_root(ActionIndex a, ObservationIndex z) {
  if (a >= model_.num_actions() || z >= model_.num_observations()) {
    throw InvalidArgument("advance_root: index out of range");
  }
  if (!root_->is_leaf()) {
    QNode& q = *root_->children_[a];
    for (auto& child : q.children_) {
      if (child->observation_ != z) continue;
      std::unique_ptr<VNode> next = std::move(child);
      next->parent_ = nullptr;
      next->weight_ = 1.0;
      root_ = std::move(next);
      num_vnodes_ = count_vnodes(*root_);
      return;
    }
  }
  Belief posterior = belief_update(model_, root_->belief_, a, z);
  root_ = make_leaf(std::move(posterior), z, 1.0, nullptr);
  num_vnodes_ = 1;
}

std::size_t QvTree::count_vnodes(const VNode& v) const {
  std::size_t n = 1;
  for (const auto& q : v.children_) {
    for (const auto& child : q->children_) n += count_vnodes(*child);
  }
  return n;
}

}  // namespace qvts

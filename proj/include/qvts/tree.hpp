#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qvts/pomdp.hpp"
#include "qvts/random.hpp"

namespace qvts {

enum class ExpansionMode { kSample, kExact };
enum class ActionRule { kMaxLower, kMaxUpper };

struct TreeConfig {
  /// Forward samples drawn per Q-node in sample mode.
  std::size_t samples_per_qnode = 64;
  /// Wall-clock budget per plan() call; <= 0 disables it.
  double time_budget_ms = 1000.0;
  /// plan() stops once root U - L falls below this.
  double gap_tolerance = 1e-3;
  /// plan() stops once the tree holds this many V-nodes.
  std::size_t node_cap = 100000;
  /// Expansions per plan() call; 0 means unlimited.
  std::size_t max_expansions = 0;
  ActionRule action_rule = ActionRule::kMaxLower;
  ExpansionMode expansion_mode = ExpansionMode::kSample;
  std::uint64_t seed = 0;
};

class QNode;

class VNode {
 public:
  const Belief& belief() const { return belief_; }
  ObservationIndex observation() const { return observation_; }
  double weight() const { return weight_; }
  QNode* parent() const { return parent_; }
  const std::vector<std::unique_ptr<QNode>>& children() const {
    return children_;
  }
  bool is_leaf() const { return children_.empty(); }

  double upper() const { return upper_; }
  double lower() const { return lower_; }
  double heuristic() const { return heuristic_; }
  /// Leaf in this subtree whose expansion matters most to the root.
  VNode* expand_target() const { return expand_; }

 private:
  friend class QvTree;
  Belief belief_;
  ObservationIndex observation_ = 0;
  double weight_ = 1.0;
  QNode* parent_ = nullptr;
  std::vector<std::unique_ptr<QNode>> children_;
  double upper_ = 0.0;
  double lower_ = 0.0;
  double heuristic_ = 0.0;
  VNode* expand_ = nullptr;
};

class QNode {
 public:
  const Belief& belief() const { return parent_->belief(); }
  ActionIndex action() const { return action_; }
  VNode* parent() const { return parent_; }
  const std::vector<std::unique_ptr<VNode>>& children() const {
    return children_;
  }
  /// R(b, a) of the parent belief.
  double reward() const { return reward_; }

  double upper() const { return upper_; }
  double lower() const { return lower_; }
  double heuristic() const { return heuristic_; }
  VNode* expand_target() const { return expand_; }

 private:
  friend class QvTree;
  ActionIndex action_ = 0;
  VNode* parent_ = nullptr;
  std::vector<std::unique_ptr<VNode>> children_;
  double reward_ = 0.0;
  double upper_ = 0.0;
  double lower_ = 0.0;
  double heuristic_ = 0.0;
  VNode* expand_ = nullptr;
};

class AlreadyExpanded : public Error {
 public:
  using Error::Error;
};

/// n independent draws of x ~ b, x' ~ T(x, a, .), z ~ O(x', .). Draw i reads
/// only stream i of `key`, so pipelines are order-independent.
std::vector<ObservationIndex> forward_sampling(const PomdpModel& model,
                                               const Belief& b, ActionIndex a,
                                               std::size_t n, std::uint64_t key);

/// Bound triple carried by every tree node.
struct NodeBounds {
  double upper = 0.0;
  double lower = 0.0;
  double heuristic = 0.0;
};

struct WeightedBounds {
  double weight = 1.0;
  NodeBounds bounds;
};

/// Q-node backup from its observation branches: r + gamma * sum w * U (and
/// likewise L), heuristic gamma * max w * H. `selected` receives the index of
/// the heuristic-maximizing branch, ties to the lowest. Needs one branch.
NodeBounds combine_branches(double reward, double discount,
                            std::span<const WeightedBounds> branches,
                            std::size_t* selected = nullptr);

/// V-node backup from its Q-node children: max U, max L, and the heuristic of
/// the U-maximizing child (ties to the lowest index), whose index goes to
/// `selected`. Needs one child.
NodeBounds combine_actions(std::span<const NodeBounds> children,
                           std::size_t* selected = nullptr);

struct PlanStats {
  std::size_t expansions = 0;
  std::size_t tree_size = 0;
  double elapsed_ms = 0.0;
  double root_upper = 0.0;
  double root_lower = 0.0;
};

/// Anytime online search over interleaved belief (V) and belief-action (Q)
/// nodes. Leaves are bounded by the offline upper (FIB) and lower (PBVI)
/// alpha-sets; each node carries the leaf whose gap most affects the root, so
/// choosing the next leaf is O(1).
///
/// The model and both alpha-sets are borrowed and must outlive the tree.
class QvTree {
 public:
  QvTree(const PomdpModel& model, const AlphaSet& upper_bound,
         const AlphaSet& lower_bound, const Belief& root_belief,
         const TreeConfig& config);

  ~QvTree();

  QvTree(const QvTree&) = delete;
  QvTree& operator=(const QvTree&) = delete;

  const VNode& root() const { return *root_; }
  VNode& root() { return *root_; }
  const TreeConfig& config() const { return config_; }
  const PomdpModel& model() const { return model_; }
  std::size_t size() const { return num_vnodes_; }

  VNode* find_vnode_to_expand() const { return root_->expand_; }

  /// Adds one Q-node child per action and refreshes v. Does not touch
  /// ancestors; see backup().
  void expand_vnode(VNode& v);

  /// Re-runs the Q/V updates from v's parent up to the root.
  void backup(VNode& v);

  /// Expand the root's target leaf and back up; returns the expanded node.
  VNode& expand_once();

  /// Expand until a budget is exhausted, then pick the root action.
  ActionIndex plan(PlanStats* stats = nullptr);

  /// Root action under the configured rule without further search.
  ActionIndex optimal_action() const;

  /// Re-root at the child for (a, z) when it exists, otherwise at a fresh
  /// leaf holding the Bayes posterior. Propagates ZeroLikelihoodObservation.
  void advance_root(ActionIndex a, ObservationIndex z);

  // Node updates, exposed for tests.
  void update_qnode(QNode& q) const;
  void update_vnode(VNode& v) const;

 private:
  class BranchEvaluator;

  std::unique_ptr<VNode> make_leaf(Belief belief, ObservationIndex z,
                                   double weight, QNode* parent) const;
  std::unique_ptr<VNode> make_leaf(Belief belief, ObservationIndex z,
                                   double weight, QNode* parent, double upper,
                                   double lower) const;
  std::unique_ptr<QNode> construct_qnode(VNode& parent, ActionIndex a);
  std::size_t count_vnodes(const VNode& v) const;

  const PomdpModel& model_;
  const AlphaSet& upper_bound_;
  const AlphaSet& lower_bound_;
  TreeConfig config_;
  Rng rng_;
  std::unique_ptr<BranchEvaluator> upper_eval_;
  std::unique_ptr<BranchEvaluator> lower_eval_;
  std::unique_ptr<VNode> root_;
  std::size_t num_vnodes_ = 0;
};

}  // namespace qvts

#pragma once

#include <span>
#include <vector>

#include "qvts/gridworld.hpp"
#include "qvts/pomdp.hpp"

namespace qvts {

/// Most likely state; ties go to the lowest index.
StateIndex belief_mode(const Belief& b);

class Unreachable : public Error {
 public:
  using Error::Error;
};

/// Octile distance with unit diagonal cost, i.e. max(|dc|, |dr|).
int octile_unit(Cell a, Cell b);

/// Shortest 8-connected path over free cells, every move costing 1. The
/// result starts at `from` and ends at the goal. Among equal-length paths the
/// search prefers lower action indices, so the result is deterministic.
/// Throws Unreachable when the goal cannot be reached and InvalidArgument
/// when `from` is occupied.
std::vector<StateIndex> astar_path(const GridMap& map, StateIndex from);

/// Stencil action that moves between two 8-adjacent cells (stay if equal).
ActionIndex step_action(const GridMap& map, StateIndex from, StateIndex to);

/// First action along astar_path; stay at the goal.
ActionIndex astar_plan(const GridMap& map, StateIndex from);

/// policy[belief_mode(b)].
ActionIndex mdp_act(std::span<const ActionIndex> policy, const Belief& b);

/// Known-state planner fed with the belief mode.
class BaselinePlanner {
 public:
  enum class Kind { kAstar, kMdp };

  static BaselinePlanner astar(const GridMap& map, bool cache_path = false);
  static BaselinePlanner mdp(const GridMap& map,
                             std::vector<ActionIndex> policy);

  Kind kind() const { return kind_; }
  ActionIndex act(const Belief& b);

 private:
  BaselinePlanner(Kind kind, const GridMap& map,
                  std::vector<ActionIndex> policy, bool cache_path);

  Kind kind_;
  const GridMap* map_;
  std::vector<ActionIndex> policy_;
  bool cache_path_;
  // Remaining cached path, front = current expected cell.
  std::vector<StateIndex> path_;
  std::size_t path_pos_ = 0;
};

}  // namespace qvts

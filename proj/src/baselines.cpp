#include "qvts/baselines.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

namespace qvts {

StateIndex belief_mode(const Belief& b) {
  const auto probs = b.probs();
  return static_cast<StateIndex>(std::max_element(probs.begin(), probs.end()) -
                                 probs.begin());
}

int octile_unit(Cell a, Cell b) {
  return std::max(std::abs(a.col - b.col), std::abs(a.row - b.row));
}

std::vector<StateIndex> astar_path(const GridMap& map, StateIndex from) {
  if (from >= map.size() || map.occupied(from)) {
    throw InvalidArgument("A* start is not a free cell");
  }
  const StateIndex goal = map.goal();
  const Cell goal_cell = map.cell(goal);
  constexpr int kUnseen = std::numeric_limits<int>::max();
  std::vector<int> g(map.size(), kUnseen);
  std::vector<StateIndex> parent(map.size(), map.size());
  std::vector<std::uint8_t> closed(map.size(), 0);

  // (f, h, state): lowest f first, then closest to goal, then lowest index.
  using Entry = std::tuple<int, int, StateIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[from] = 0;
  const int h0 = octile_unit(map.cell(from), goal_cell);
  open.emplace(h0, h0, from);
  while (!open.empty()) {
    const auto [f, h, x] = open.top();
    open.pop();
    if (closed[x]) continue;
    closed[x] = 1;
    if (x == goal) break;
    const Cell c = map.cell(x);
    for (ActionIndex a = 0; a < kNumGridActions; ++a) {
      if (a == kStay) continue;
      const int col = c.col + stencil_dx(a);
      const int row = c.row + stencil_dy(a);
      if (map.occupied_at(col, row)) continue;
      const StateIndex y = map.index(col, row);
      if (closed[y] || g[x] + 1 >= g[y]) continue;
      g[y] = g[x] + 1;
      parent[y] = x;
      const int hy = octile_unit({col, row}, goal_cell);
      open.emplace(g[y] + hy, hy, y);
    }
  }
  if (g[goal] == kUnseen) throw Unreachable("goal is not reachable");
  std::vector<StateIndex> path{goal};
  while (path.back() != from) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

ActionIndex step_action(const GridMap& map, StateIndex from, StateIndex to) {
  const Cell a = map.cell(from);
  const Cell b = map.cell(to);
  const int dx = b.col - a.col;
  const int dy = b.row - a.row;
  if (std::abs(dx) > 1 || std::abs(dy) > 1) {
    throw InvalidArgument("cells are not adjacent");
  }
  return static_cast<ActionIndex>((dy + 1) * 3 + (dx + 1));
}

ActionIndex astar_plan(const GridMap& map, StateIndex from) {
  if (from == map.goal()) return kStay;
  const std::vector<StateIndex> path = astar_path(map, from);
  return step_action(map, path[0], path[1]);
}

ActionIndex mdp_act(std::span<const ActionIndex> policy, const Belief& b) {
  if (policy.size() != b.size()) {
    throw InvalidArgument("policy length does not match the belief");
  }
  return policy[belief_mode(b)];
}

BaselinePlanner::BaselinePlanner(Kind kind, const GridMap& map,
                                 std::vector<ActionIndex> policy,
                                 bool cache_path)
    : kind_(kind), map_(&map), policy_(std::move(policy)), cache_path_(cache_path) {}

BaselinePlanner BaselinePlanner::astar(const GridMap& map, bool cache_path) {
  return BaselinePlanner(Kind::kAstar, map, {}, cache_path);
}

BaselinePlanner BaselinePlanner::mdp(const GridMap& map,
                                     std::vector<ActionIndex> policy) {
  if (policy.size() != map.size()) {
    throw InvalidArgument("MDP policy needs one action per state");
  }
  return BaselinePlanner(Kind::kMdp, map, std::move(policy), false);
}

ActionIndex BaselinePlanner::act(const Belief& b) {
  if (kind_ == Kind::kMdp) return mdp_act(policy_, b);
  const StateIndex mode = belief_mode(b);
  if (mode == map_->goal()) return kStay;
  if (!cache_path_) return astar_plan(*map_, mode);
  auto it = std::find(path_.begin() + static_cast<std::ptrdiff_t>(
                                          std::min(path_pos_, path_.size())),
                      path_.end(), mode);
  if (it == path_.end() || it + 1 == path_.end()) {
    path_ = astar_path(*map_, mode);
    path_pos_ = 0;
    it = path_.begin();
  }
  path_pos_ = static_cast<std::size_t>(it - path_.begin());
  return step_action(*map_, *it, *(it + 1));
}

}  // namespace qvts

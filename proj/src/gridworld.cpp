#include "qvts/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qvts {

namespace {

// Stencil slots in angular order around the centre.
constexpr std::array<std::size_t, 8> kRing = {0, 1, 2, 5, 8, 7, 6, 3};

constexpr double kOccupiedReward = -2.0;
constexpr double kFreeReward = -1.0;
constexpr double kGoalReward = 0.0;
constexpr double kWrongStopReward = -2.0;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
  return lines;
}

}  // namespace

const char* action_name(ActionIndex a) {
  static constexpr const char* kNames[] = {
      "up-left", "up", "up-right", "left", "stay",
      "right", "down-left", "down", "down-right"};
  return a < kNumGridActions ? kNames[a] : "invalid";
}

GridMap::GridMap(int width, int height, std::vector<std::uint8_t> occupancy,
                 StateIndex goal, std::vector<StateIndex> start_region)
    : width_(width),
      height_(height),
      occupancy_(std::move(occupancy)),
      goal_(goal),
      start_region_(std::move(start_region)) {
  if (width_ <= 0 || height_ <= 0) {
    throw InvalidArgument("map dimensions must be positive");
  }
  if (occupancy_.size() !=
      static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
    throw InvalidArgument("occupancy size does not match dimensions");
  }
  for (auto& c : occupancy_) c = c ? 1 : 0;
  if (goal_ >= occupancy_.size()) throw InvalidArgument("goal out of range");
  if (occupancy_[goal_]) {
    throw MapParseError(MapParseError::Kind::kGoalOccupied,
                        "goal cell is occupied");
  }
  for (StateIndex s : start_region_) {
    if (s >= occupancy_.size() || occupancy_[s]) {
      throw InvalidArgument("start region cell must be a free map cell");
    }
  }
  std::sort(start_region_.begin(), start_region_.end());
  start_region_.erase(std::unique(start_region_.begin(), start_region_.end()),
                      start_region_.end());
}

std::vector<StateIndex> GridMap::free_cells() const {
  std::vector<StateIndex> cells;
  for (StateIndex x = 0; x < occupancy_.size(); ++x) {
    if (!occupancy_[x]) cells.push_back(x);
  }
  return cells;
}

MapParseError::MapParseError(Kind kind, const std::string& detail)
    : Error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

const char* to_string(MapParseError::Kind kind) {
  switch (kind) {
    case MapParseError::Kind::kNonRectangular: return "NonRectangular";
    case MapParseError::Kind::kMissingGoal: return "MissingGoal";
    case MapParseError::Kind::kMultipleGoals: return "MultipleGoals";
    case MapParseError::Kind::kGoalOccupied: return "GoalOccupied";
    case MapParseError::Kind::kBadCharacter: return "BadCharacter";
    case MapParseError::Kind::kEmpty: return "Empty";
  }
  return "Unknown";
}

GridMap parse_map(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front().empty()) {
    throw MapParseError(MapParseError::Kind::kEmpty, "no map rows");
  }
  const std::size_t width = lines.front().size();
  std::vector<std::uint8_t> occupancy;
  std::vector<StateIndex> start;
  std::vector<StateIndex> goals;
  for (std::size_t row = 0; row < lines.size(); ++row) {
    if (lines[row].size() != width) {
      throw MapParseError(MapParseError::Kind::kNonRectangular,
                          "row " + std::to_string(row) + " has " +
                              std::to_string(lines[row].size()) +
                              " cells, expected " + std::to_string(width));
    }
    for (char ch : lines[row]) {
      const StateIndex idx = occupancy.size();
      switch (ch) {
        case '#': occupancy.push_back(1); break;
        case '.': occupancy.push_back(0); break;
        case 'G':
          occupancy.push_back(0);
          goals.push_back(idx);
          break;
        case 'S':
          occupancy.push_back(0);
          start.push_back(idx);
          break;
        default:
          throw MapParseError(MapParseError::Kind::kBadCharacter,
                              std::string("unexpected character '") + ch + "'");
      }
    }
  }
  if (goals.empty()) {
    throw MapParseError(MapParseError::Kind::kMissingGoal, "no 'G' cell");
  }
  if (goals.size() > 1) {
    throw MapParseError(MapParseError::Kind::kMultipleGoals,
                        std::to_string(goals.size()) + " 'G' cells");
  }
  return GridMap(static_cast<int>(width), static_cast<int>(lines.size()),
                 std::move(occupancy), goals.front(), std::move(start));
}

std::string serialize_map(const GridMap& map) {
  std::string out;
  out.reserve(map.size() + static_cast<std::size_t>(map.height()));
  std::size_t next_start = 0;
  const auto& start = map.start_region();
  for (StateIndex x = 0; x < map.size(); ++x) {
    char ch = map.occupied(x) ? '#' : '.';
    if (x == map.goal()) {
      ch = 'G';
    } else if (next_start < start.size() && start[next_start] == x) {
      ch = 'S';
    }
    while (next_start < start.size() && start[next_start] <= x) ++next_start;
    out.push_back(ch);
    if (map.cell(x).col == map.width() - 1) out.push_back('\n');
  }
  return out;
}

void MotionNoise::validate() const {
  if (!(p_intended >= 0.0 && p_stay >= 0.0 && p_lateral >= 0.0)) {
    throw InvalidNoise("motion probabilities must be non-negative");
  }
  const double total = p_intended + p_stay + 2.0 * p_lateral;
  if (std::abs(total - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg << "motion probabilities sum to " << total;
    throw InvalidNoise(msg.str());
  }
}

std::array<double, 9> intended_kernel(ActionIndex a, const MotionNoise& noise) {
  std::array<double, 9> kernel{};
  if (a == kStay) {
    kernel[kStay] = 1.0;
    return kernel;
  }
  const auto pos = static_cast<std::size_t>(
      std::find(kRing.begin(), kRing.end(), a) - kRing.begin());
  kernel[a] += noise.p_intended;
  kernel[kStay] += noise.p_stay;
  kernel[kRing[(pos + 1) % 8]] += noise.p_lateral;
  kernel[kRing[(pos + 7) % 8]] += noise.p_lateral;
  return kernel;
}

TransitionTable build_transition(const GridMap& map, const MotionNoise& noise) {
  noise.validate();
  TransitionTable table(map.size() * kNumGridActions);
  for (StateIndex x = 0; x < map.size(); ++x) {
    const Cell c = map.cell(x);
    for (ActionIndex a = 0; a < kNumGridActions; ++a) {
      auto& row = table[x * kNumGridActions + a];
      if (map.occupied(x)) {
        row.push_back({x, 1.0});
        continue;
      }
      const auto kernel = intended_kernel(a, noise);
      double self = 0.0;
      for (std::size_t slot = 0; slot < 9; ++slot) {
        const double p = kernel[slot];
        if (p == 0.0) continue;
        const int col = c.col + stencil_dx(slot);
        const int r = c.row + stencil_dy(slot);
        if (slot == kStay || map.occupied_at(col, r)) {
          self += p;
        } else {
          row.push_back({map.index(col, r), p});
        }
      }
      if (self > 0.0) row.push_back({x, self});
    }
  }
  return table;
}

ObservationIndex cell_signature(const GridMap& map, StateIndex x) {
  const Cell c = map.cell(x);
  ObservationIndex z = 0;
  for (std::size_t bit = 0; bit < kSensorSlots.size(); ++bit) {
    const std::size_t slot = kSensorSlots[bit];
    if (map.occupied_at(c.col + stencil_dx(slot), c.row + stencil_dy(slot))) {
      z |= ObservationIndex{1} << bit;
    }
  }
  return z;
}

std::vector<double> build_observation(const GridMap& map,
                                      double sensor_accuracy) {
  if (!(sensor_accuracy > 0.5 && sensor_accuracy <= 1.0)) {
    throw InvalidArgument("sensor accuracy must lie in (0.5, 1]");
  }
  std::vector<double> table(map.size() * kNumGridObservations, 0.0);
  for (StateIndex x = 0; x < map.size(); ++x) {
    double* row = table.data() + x * kNumGridObservations;
    if (map.occupied(x)) {
      std::fill(row, row + kNumGridObservations, 1.0 / kNumGridObservations);
      continue;
    }
    const ObservationIndex truth = cell_signature(map, x);
    for (ObservationIndex z = 0; z < kNumGridObservations; ++z) {
      double p = 1.0;
      for (std::size_t bit = 0; bit < kSensorSlots.size(); ++bit) {
        const bool agree = ((z >> bit) & 1U) == ((truth >> bit) & 1U);
        p *= agree ? sensor_accuracy : 1.0 - sensor_accuracy;
      }
      row[z] = p;
    }
  }
  return table;
}

double cell_reward(const GridMap& map, int col, int row) {
  if (map.occupied_at(col, row)) return kOccupiedReward;
  return map.index(col, row) == map.goal() ? kGoalReward : kFreeReward;
}

std::vector<double> build_reward(const GridMap& map, const MotionNoise& noise) {
  noise.validate();
  std::vector<double> table(map.size() * kNumGridActions, 0.0);
  for (StateIndex x = 0; x < map.size(); ++x) {
    const Cell c = map.cell(x);
    for (ActionIndex a = 0; a < kNumGridActions; ++a) {
      double& r = table[x * kNumGridActions + a];
      if (map.occupied(x)) {
        r = kOccupiedReward;
      } else if (a == kStay && x != map.goal()) {
        r = kWrongStopReward;
      } else {
        const auto kernel = intended_kernel(a, noise);
        r = 0.0;
        for (std::size_t slot = 0; slot < 9; ++slot) {
          if (kernel[slot] == 0.0) continue;
          r += kernel[slot] * cell_reward(map, c.col + stencil_dx(slot),
                                          c.row + stencil_dy(slot));
        }
      }
    }
  }
  return table;
}

PomdpModel build_grid_model(const GridMap& map, const GridModelParams& params) {
  const auto free = map.free_cells();
  ModelTables tables;
  tables.num_states = map.size();
  tables.num_actions = kNumGridActions;
  tables.num_observations = kNumGridObservations;
  tables.transitions = build_transition(map, params.noise);
  tables.observations = build_observation(map, params.sensor_accuracy);
  tables.rewards = build_reward(map, params.noise);
  tables.discount = params.discount;
  tables.initial_belief = Belief::uniform_over(map.size(), free);
  return PomdpModel(std::move(tables));
}

}  // namespace qvts

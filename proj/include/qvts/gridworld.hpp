#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qvts/pomdp.hpp"

namespace qvts {

// Actions index the 3x3 stencil row-major, so action a moves by
// (a % 3 - 1, a / 3 - 1) with row 0 at the top of the map:
//
//   0 | 1 | 2
//   3 | 4 | 5
//   6 | 7 | 8
inline constexpr std::size_t kNumGridActions = 9;
inline constexpr ActionIndex kStay = 4;
inline constexpr ActionIndex kUp = 1;
inline constexpr ActionIndex kLeft = 3;
inline constexpr ActionIndex kRight = 5;
inline constexpr ActionIndex kDown = 7;
// Sensors look at stencil cells 1, 3, 5, 7; bit i of an observation is the
// reading of the i-th sensor in that order.
inline constexpr std::size_t kNumGridObservations = 16;
inline constexpr std::array<ActionIndex, 4> kSensorSlots = {1, 3, 5, 7};

inline constexpr int stencil_dx(std::size_t slot) {
  return static_cast<int>(slot % 3) - 1;
}
inline constexpr int stencil_dy(std::size_t slot) {
  return static_cast<int>(slot / 3) - 1;
}

const char* action_name(ActionIndex a);

struct Cell {
  int col = 0;
  int row = 0;
  bool operator==(const Cell&) const = default;
};

class GridMap {
 public:
  GridMap(int width, int height, std::vector<std::uint8_t> occupancy,
          StateIndex goal, std::vector<StateIndex> start_region = {});

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return occupancy_.size(); }
  StateIndex goal() const { return goal_; }
  const std::vector<StateIndex>& start_region() const { return start_region_; }
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  bool contains(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  StateIndex index(int col, int row) const {
    return static_cast<StateIndex>(row) * static_cast<StateIndex>(width_) +
           static_cast<StateIndex>(col);
  }
  Cell cell(StateIndex x) const {
    return {static_cast<int>(x % static_cast<StateIndex>(width_)),
            static_cast<int>(x / static_cast<StateIndex>(width_))};
  }
  bool occupied(StateIndex x) const { return occupancy_[x] != 0; }
  /// Off-map cells read as occupied.
  bool occupied_at(int col, int row) const {
    return !contains(col, row) || occupancy_[index(col, row)] != 0;
  }
  std::vector<StateIndex> free_cells() const;

  bool operator==(const GridMap&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> occupancy_;
  StateIndex goal_;
  std::vector<StateIndex> start_region_;
};

class MapParseError : public Error {
 public:
  enum class Kind { kNonRectangular, kMissingGoal, kMultipleGoals,
                    kGoalOccupied, kBadCharacter, kEmpty };
  MapParseError(Kind kind, const std::string& detail);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(MapParseError::Kind kind);

/// Rectangular ASCII block: '#' occupied, '.' free, 'G' goal, 'S' start-region
/// member. Blank lines at either end are ignored, as is a trailing '\r'.
GridMap parse_map(std::string_view text);
std::string serialize_map(const GridMap& map);

class InvalidNoise : public Error {
 public:
  using Error::Error;
};

/// Motion kernel for a commanded move: the intended cell, the current cell,
/// and each of the two ring neighbours of the intended direction.
struct MotionNoise {
  double p_intended = 0.8;
  double p_stay = 0.1;
  double p_lateral = 0.05;

  void validate() const;
};

struct GridModelParams {
  MotionNoise noise;
  double sensor_accuracy = 0.95;
  double discount = 0.95;
};

/// T'(x, a, .) over the 3x3 stencil, before clamping; slot 4 is the current
/// cell. The stay action is deterministic.
std::array<double, 9> intended_kernel(ActionIndex a, const MotionNoise& noise);

using TransitionTable = std::vector<std::vector<Transition>>;

/// Clamped transition T: mass aimed at occupied or off-map cells stays at x.
/// Occupied states are absorbing.
TransitionTable build_transition(const GridMap& map, const MotionNoise& noise);

/// True 4-bit sensor signature of a cell.
ObservationIndex cell_signature(const GridMap& map, StateIndex x);

/// O(x, z) for the 4 independent binary sensors; occupied cells get a uniform
/// row.
std::vector<double> build_observation(const GridMap& map,
                                      double sensor_accuracy);

/// r(y) = -2 occupied or off-map, -1 free, 0 goal.
double cell_reward(const GridMap& map, int col, int row);

/// R(x, 4) = -2 off goal; otherwise sum_y r(y) T'(x, a, y) using the
/// unclamped kernel. Occupied states get -2 everywhere.
std::vector<double> build_reward(const GridMap& map, const MotionNoise& noise);

/// Belief is uniform over the free cells.
PomdpModel build_grid_model(const GridMap& map, const GridModelParams& params);

struct LandmarkMapParams {
  int width = 100;
  int height = 40;
  /// Number of small obstacle blocks scattered in the interior.
  int num_landmarks = 10;
  int min_block = 1;
  int max_block = 3;
  /// Keep this many free cells between a block and the border / other blocks.
  int clearance = 3;
  std::uint64_t seed = 1;
};

/// Open rectangular map with a few small obstacle blocks that act as
/// localization landmarks. The goal is a free interior cell adjacent to one
/// of the blocks.
GridMap generate_landmark_map(const LandmarkMapParams& params);

}  // namespace qvts

#include <algorithm>

#include "qvts/gridworld.hpp"
#include "qvts/random.hpp"

namespace qvts {

namespace {

struct Block {
  int col, row, w, h;
};

int draw(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

bool separated(const Block& a, const Block& b, int gap) {
  return a.col + a.w + gap <= b.col || b.col + b.w + gap <= a.col ||
         a.row + a.h + gap <= b.row || b.row + b.h + gap <= a.row;
}

}  // namespace

GridMap generate_landmark_map(const LandmarkMapParams& params) {
  if (params.width < 2 * params.clearance + params.max_block ||
      params.height < 2 * params.clearance + params.max_block ||
      params.min_block < 1 || params.max_block < params.min_block) {
    throw InvalidArgument("landmark map parameters leave no room for blocks");
  }
  Rng rng(params.seed);
  std::vector<Block> blocks;
  for (int attempt = 0;
       attempt < 1000 * std::max(1, params.num_landmarks) &&
       static_cast<int>(blocks.size()) < params.num_landmarks;
       ++attempt) {
    Block b;
    b.w = draw(rng, params.min_block, params.max_block);
    b.h = draw(rng, params.min_block, params.max_block);
    b.col = draw(rng, params.clearance, params.width - params.clearance - b.w);
    b.row = draw(rng, params.clearance, params.height - params.clearance - b.h);
    const bool fits = std::all_of(blocks.begin(), blocks.end(),
                                  [&](const Block& other) {
                                    return separated(b, other, params.clearance);
                                  });
    if (fits) blocks.push_back(b);
  }
  if (blocks.empty()) throw InvalidArgument("could not place any landmark");

  std::vector<std::uint8_t> occupancy(
      static_cast<std::size_t>(params.width) * params.height, 0);
  for (const Block& b : blocks) {
    for (int r = b.row; r < b.row + b.h; ++r) {
      for (int c = b.col; c < b.col + b.w; ++c) {
        occupancy[static_cast<std::size_t>(r) * params.width + c] = 1;
      }
    }
  }

  // Goal sits on the side of the block nearest the map centre, so reaching it
  // is informative.
  const Block& anchor = *std::min_element(
      blocks.begin(), blocks.end(), [&](const Block& l, const Block& r) {
        auto dist = [&](const Block& b) {
          return std::abs(2 * b.col + b.w - params.width) +
                 std::abs(2 * b.row + b.h - params.height);
        };
        return dist(l) < dist(r);
      });
  const int goal_col = anchor.col + anchor.w;
  const int goal_row = anchor.row + anchor.h / 2;
  const StateIndex goal =
      static_cast<StateIndex>(goal_row) * params.width + goal_col;
  return GridMap(params.width, params.height, std::move(occupancy), goal);
}

}  // namespace qvts

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qvts/gridworld.hpp"
#include "qvts/pomdp.hpp"

namespace qvts {

struct RenderSpec {
  enum class Format { kPpm, kSvg };

  int cell_px = 16;
  bool occupancy = true;
  bool belief = true;
  bool path = true;
  bool markers = true;
  Format format = Format::kPpm;

  void validate() const;
};

/// What to draw on top of the map. Empty belief or path disables that layer.
struct RenderInput {
  const GridMap* map = nullptr;
  std::vector<double> belief;
  std::vector<StateIndex> path;
  /// Start marker; ignored when there is no path.
  bool mark_start = true;
};

struct Image {
  int width = 0;
  int height = 0;
  /// Row-major RGB.
  std::vector<std::uint8_t> rgb;

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
};

/// Free cells are white, occupied cells dark grey. The belief tints free cells
/// blue in proportion to b(x) / max b, so the most likely cell is fully
/// saturated.
Image render_image(const RenderInput& input, const RenderSpec& spec);

/// Binary P6 encoding.
std::string encode_ppm(const Image& image);

std::string render_svg(const RenderInput& input, const RenderSpec& spec);

/// Renders in spec.format and writes the bytes to `path`.
void write_render(const std::string& path, const RenderInput& input,
                  const RenderSpec& spec);

}  // namespace qvts

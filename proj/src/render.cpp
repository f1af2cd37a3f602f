#include "qvts/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qvts {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kFree = {255, 255, 255};
constexpr Rgb kOccupied = {64, 64, 64};
constexpr Rgb kBeliefFull = {20, 70, 220};
constexpr Rgb kPath = {240, 140, 0};
constexpr Rgb kStart = {0, 170, 60};
constexpr Rgb kGoal = {220, 30, 30};

Rgb lerp(Rgb a, Rgb b, double t) {
  Rgb out;
  for (int i = 0; i < 3; ++i) {
    out[i] = static_cast<std::uint8_t>(std::lround(a[i] + (b[i] - a[i]) * t));
  }
  return out;
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

double belief_peak(const std::vector<double>& belief) {
  const double peak =
      belief.empty() ? 0.0 : *std::max_element(belief.begin(), belief.end());
  return peak > 0.0 ? peak : 1.0;
}

Rgb cell_color(const RenderInput& in, const RenderSpec& spec, StateIndex x,
               double peak) {
  if (spec.occupancy && in.map->occupied(x)) return kOccupied;
  if (spec.belief && !in.belief.empty()) {
    return lerp(kFree, kBeliefFull, in.belief[x] / peak);
  }
  return kFree;
}

void check_input(const RenderInput& in, const RenderSpec& spec) {
  spec.validate();
  if (in.map == nullptr) throw InvalidArgument("render input has no map");
  if (!in.belief.empty() && in.belief.size() != in.map->size()) {
    throw InvalidArgument("belief size does not match the map");
  }
  for (StateIndex x : in.path) {
    if (x >= in.map->size()) throw InvalidArgument("path leaves the map");
  }
}

class Canvas {
 public:
  Canvas(int w, int h) { image_ = {w, h, std::vector<std::uint8_t>(3 * static_cast<std::size_t>(w) * h)}; }

  void put(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * image_.width + x) * 3;
    std::copy(c.begin(), c.end(), image_.rgb.begin() + static_cast<std::ptrdiff_t>(i));
  }
  void fill(int x0, int y0, int x1, int y1, Rgb c) {
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) put(x, y, c);
    }
  }
  // Bresenham, thickened to a small square brush.
  void line(int x0, int y0, int x1, int y1, int brush, Rgb c) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      fill(x0 - brush / 2, y0 - brush / 2, x0 - brush / 2 + brush,
           y0 - brush / 2 + brush, c);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }
  Image take() { return std::move(image_); }

 private:
  Image image_;
};

}  // namespace

void RenderSpec::validate() const {
  if (cell_px < 1) throw InvalidArgument("cell pixel size must be at least 1");
}

Image render_image(const RenderInput& in, const RenderSpec& spec) {
  check_input(in, spec);
  const GridMap& map = *in.map;
  const int px = spec.cell_px;
  Canvas canvas(map.width() * px, map.height() * px);
  const double peak = belief_peak(in.belief);
  for (StateIndex x = 0; x < map.size(); ++x) {
    const Cell c = map.cell(x);
    canvas.fill(c.col * px, c.row * px, (c.col + 1) * px, (c.row + 1) * px,
                cell_color(in, spec, x, peak));
  }
  auto centre = [&](StateIndex x) {
    const Cell c = map.cell(x);
    return std::pair{c.col * px + px / 2, c.row * px + px / 2};
  };
  const int brush = std::max(1, px / 6);
  if (spec.path && in.path.size() > 1) {
    for (std::size_t i = 1; i < in.path.size(); ++i) {
      const auto [x0, y0] = centre(in.path[i - 1]);
      const auto [x1, y1] = centre(in.path[i]);
      canvas.line(x0, y0, x1, y1, brush, kPath);
    }
  }
  if (spec.markers) {
    const int inset = px / 4;
    auto mark = [&](StateIndex x, Rgb color) {
      const Cell c = map.cell(x);
      canvas.fill(c.col * px + inset, c.row * px + inset,
                  (c.col + 1) * px - inset, (c.row + 1) * px - inset, color);
    };
    if (in.mark_start && !in.path.empty()) mark(in.path.front(), kStart);
    mark(map.goal(), kGoal);
  }
  return canvas.take();
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(image.rgb.begin(), image.rgb.end());
  return out;
}

std::string render_svg(const RenderInput& in, const RenderSpec& spec) {
  check_input(in, spec);
  const GridMap& map = *in.map;
  const int px = spec.cell_px;
  const double peak = belief_peak(in.belief);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << map.width() * px
      << "\" height=\"" << map.height() * px << "\" shape-rendering=\"crispEdges\">\n";
  for (StateIndex x = 0; x < map.size(); ++x) {
    const Rgb color = cell_color(in, spec, x, peak);
    if (color == kFree) continue;
    const Cell c = map.cell(x);
    out << "<rect x=\"" << c.col * px << "\" y=\"" << c.row * px << "\" width=\""
        << px << "\" height=\"" << px << "\" fill=\"" << hex(color) << "\"/>\n";
  }
  if (spec.path && in.path.size() > 1) {
    out << "<polyline fill=\"none\" stroke=\"" << hex(kPath)
        << "\" stroke-width=\"" << std::max(1, px / 6) << "\" points=\"";
    for (std::size_t i = 0; i < in.path.size(); ++i) {
      const Cell c = map.cell(in.path[i]);
      out << (i ? " " : "") << c.col * px + px / 2 << ',' << c.row * px + px / 2;
    }
    out << "\"/>\n";
  }
  if (spec.markers) {
    auto mark = [&](StateIndex x, Rgb color) {
      const Cell c = map.cell(x);
      out << "<circle cx=\"" << c.col * px + px / 2 << "\" cy=\""
          << c.row * px + px / 2 << "\" r=\"" << std::max(1, px / 4)
          << "\" fill=\"" << hex(color) << "\"/>\n";
    };
    if (in.mark_start && !in.path.empty()) mark(in.path.front(), kStart);
    mark(map.goal(), kGoal);
  }
  out << "</svg>\n";
  return out.str();
}

void write_render(const std::string& path, const RenderInput& input,
                  const RenderSpec& spec) {
  const std::string bytes = spec.format == RenderSpec::Format::kSvg
                                ? render_svg(input, spec)
                                : encode_ppm(render_image(input, spec));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace qvts

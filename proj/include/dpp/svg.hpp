#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dpp/error.hpp"
#include "dpp/forest.hpp"
#include "dpp/gridworld.hpp"

namespace dpp {
namespace detail {

inline std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace detail

// Low-to-high heat ramp: dark blue through teal to yellow. The same scale is
// documented in the CLI help so rendered figures are self-describing.
inline std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
  double r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = lerp(23.0, 33.0, u);
    g = lerp(42.0, 145.0, u);
    b = lerp(108.0, 140.0, u);
  } else {
    const double u = (t - 0.5) / 0.5;
    r = lerp(33.0, 253.0, u);
    g = lerp(145.0, 231.0, u);
    b = lerp(140.0, 76.0, u);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(r),
                static_cast<int>(g), static_cast<int>(b));
  return buf;
}

inline constexpr const char* kStartColor = "#1f77b4";
inline constexpr const char* kGoalColor = "#2ca02c";
inline constexpr const char* kDecoyColor = "#ff7f0e";

// Element-list SVG document in pixel coordinates.
class SvgDocument {
 public:
  SvgDocument(double width, double height) : width_(width), height_(height) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "", double stroke_width = 0.0) {
    std::ostringstream el;
    el << "<rect x=\"" << detail::svg_num(x) << "\" y=\"" << detail::svg_num(y)
       << "\" width=\"" << detail::svg_num(w) << "\" height=\""
       << detail::svg_num(h) << "\" fill=\"" << fill << "\"";
    if (!stroke.empty()) {
      el << " stroke=\"" << stroke << "\" stroke-width=\""
         << detail::svg_num(stroke_width) << "\"";
    }
    el << "/>";
    elements_.push_back(el.str());
  }

  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& stroke = "", double stroke_width = 0.0) {
    std::ostringstream el;
    el << "<circle cx=\"" << detail::svg_num(cx) << "\" cy=\""
       << detail::svg_num(cy) << "\" r=\"" << detail::svg_num(r)
       << "\" fill=\"" << fill << "\"";
    if (!stroke.empty()) {
      el << " stroke=\"" << stroke << "\" stroke-width=\""
         << detail::svg_num(stroke_width) << "\"";
    }
    el << "/>";
    elements_.push_back(el.str());
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double stroke_width) {
    std::ostringstream el;
    el << "<line x1=\"" << detail::svg_num(x1) << "\" y1=\""
       << detail::svg_num(y1) << "\" x2=\"" << detail::svg_num(x2)
       << "\" y2=\"" << detail::svg_num(y2) << "\" stroke=\"" << stroke
       << "\" stroke-width=\"" << detail::svg_num(stroke_width) << "\"/>";
    elements_.push_back(el.str());
  }

  void polyline(std::span<const std::pair<double, double>> points,
                const std::string& stroke, double stroke_width,
                double opacity = 1.0) {
    if (points.size() < 2) return;
    std::ostringstream el;
    el << "<polyline fill=\"none\" stroke=\"" << stroke
       << "\" stroke-width=\"" << detail::svg_num(stroke_width)
       << "\" stroke-opacity=\"" << detail::svg_num(opacity)
       << "\" stroke-linejoin=\"round\" stroke-linecap=\"round\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i) el << " ";
      el << detail::svg_num(points[i].first) << ","
         << detail::svg_num(points[i].second);
    }
    el << "\"/>";
    elements_.push_back(el.str());
  }

  void text(double x, double y, double size, const std::string& content) {
    std::ostringstream el;
    el << "<text x=\"" << detail::svg_num(x) << "\" y=\"" << detail::svg_num(y)
       << "\" font-family=\"monospace\" font-size=\"" << detail::svg_num(size)
       << "\" fill=\"#222222\">" << content << "</text>";
    elements_.push_back(el.str());
  }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << detail::svg_num(width_) << "\" height=\"" << detail::svg_num(height_)
        << "\" viewBox=\"0 0 " << detail::svg_num(width_) << " "
        << detail::svg_num(height_) << "\">\n";
    for (const std::string& el : elements_) out << "  " << el << "\n";
    out << "</svg>\n";
    return out.str();
  }

 private:
  double width_;
  double height_;
  std::vector<std::string> elements_;
};

struct GridRenderOptions {
  double cell_px = 24.0;
  std::optional<NodeId> start;
  std::optional<NodeId> goal;
  std::optional<NodeId> decoy;
  std::vector<NodeId> path;
  std::string title;
};

// One tinted square per free cell, walls in near-black, markers as rings
// (blue start, green goal, orange decoy), optional path polyline, and a
// legend line carrying the exact value range rendered.
inline std::string render_grid_heatmap(const GridWorld& world,
                                       std::span<const double> values,
                                       const GridRenderOptions& options = {}) {
  if (static_cast<int>(values.size()) != world.graph.node_count()) {
    throw InvalidArgumentError("render: one value per free cell required");
  }
  const double cell = options.cell_px;
  const double margin = cell;
  const double legend = options.title.empty() ? 0.0 : cell * 1.4;
  SvgDocument doc(world.cols * cell + 2.0 * margin,
                  world.rows * cell + 2.0 * margin + legend);

  double lo = 0.0;
  double hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  const double span = hi - lo;

  doc.rect(margin - 1.0, margin - 1.0, world.cols * cell + 2.0,
           world.rows * cell + 2.0, "#f4f4f4", "#222222", 1.0);
  for (int r = 0; r < world.rows; ++r) {
    for (int c = 0; c < world.cols; ++c) {
      const NodeId id =
          world.cell_to_node[static_cast<std::size_t>(r) *
                                 static_cast<std::size_t>(world.cols) +
                             static_cast<std::size_t>(c)];
      const double x = margin + c * cell;
      const double y = margin + r * cell;
      if (id < 0) {
        doc.rect(x, y, cell, cell, "#1b1b1b");
        continue;
      }
      const double v = values[static_cast<std::size_t>(id)];
      const double t = span > 0.0 ? (v - lo) / span : 0.5;
      doc.rect(x, y, cell, cell, heat_color(t), "#d0d0d0", 0.5);
    }
  }

  if (options.path.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(options.path.size());
    for (NodeId node : options.path) {
      const auto [r, c] = world.cell_of(node);
      pts.push_back({margin + (c + 0.5) * cell, margin + (r + 0.5) * cell});
    }
    doc.polyline(pts, "#ffffff", cell * 0.18, 0.9);
    doc.polyline(pts, "#c22222", cell * 0.1, 0.9);
  }

  const auto ring = [&](std::optional<NodeId> node, const char* color) {
    if (!node) return;
    const auto [r, c] = world.cell_of(*node);
    doc.circle(margin + (c + 0.5) * cell, margin + (r + 0.5) * cell,
               cell * 0.32, "none", color, cell * 0.14);
  };
  ring(options.start, kStartColor);
  ring(options.goal, kGoalColor);
  ring(options.decoy, kDecoyColor);

  if (!options.title.empty()) {
    doc.text(margin, world.rows * cell + margin + cell,
             cell * 0.55,
             options.title + " [" + detail::svg_num(lo) + ", " +
                 detail::svg_num(hi) + "]");
  }
  return doc.str();
}

struct ForestRenderOptions {
  double px_per_unit = 24.0;
  const WeightedGraph* ridges = nullptr;
  std::vector<Point> trajectory;
  std::string title;
};

// World-unit rendering with y flipped so north is up: trees as dark disks,
// optional ridge layer, markers in the standard colors, trajectory in red.
inline std::string render_forest(const ForestWorld& world,
                                 const ForestRenderOptions& options = {}) {
  const double s = options.px_per_unit;
  const double margin = s;
  const double legend = options.title.empty() ? 0.0 : s * 1.4;
  SvgDocument doc(world.bounds.width() * s + 2.0 * margin,
                  world.bounds.height() * s + 2.0 * margin + legend);
  const auto px = [&](const Point& p) {
    return std::pair<double, double>{
        margin + (p.x - world.bounds.min_x) * s,
        margin + (world.bounds.max_y - p.y) * s};
  };

  doc.rect(margin, margin, world.bounds.width() * s,
           world.bounds.height() * s, "#f7f5ee", "#222222", 1.0);
  if (options.ridges) {
    const WeightedGraph& g = *options.ridges;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      for (const auto& nb : g.neighbors(u)) {
        if (nb.node < u) continue;
        const auto a = px(g.coordinate(u));
        const auto b = px(g.coordinate(nb.node));
        doc.line(a.first, a.second, b.first, b.second, "#b9c4b9", s * 0.05);
      }
    }
  }
  for (const Point& tree : world.trees) {
    const auto c = px(tree);
    doc.circle(c.first, c.second, s * 0.28, "#2d5a27");
  }
  if (options.trajectory.size() >= 2) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(options.trajectory.size());
    for (const Point& p : options.trajectory) pts.push_back(px(p));
    doc.polyline(pts, "#c22222", s * 0.12, 0.95);
  }
  const auto marker = [&](const Point& p, const char* color) {
    const auto c = px(p);
    doc.circle(c.first, c.second, s * 0.34, color, "#ffffff", s * 0.08);
  };
  marker(world.start, kStartColor);
  marker(world.goal, kGoalColor);
  marker(world.decoy, kDecoyColor);
  {
    const auto g = px(world.goal);
    doc.circle(g.first, g.second, world.goal_capture_radius * s, "none",
               kGoalColor, s * 0.04);
  }
  if (!options.title.empty()) {
    doc.text(margin, world.bounds.height() * s + margin + s, s * 0.55,
             options.title);
  }
  return doc.str();
}

}  // namespace dpp

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dpp/error.hpp"
#include "dpp/graph.hpp"

namespace dpp {

// Axis-aligned rectangle, closed on all sides.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double diagonal() const { return std::hypot(width(), height()); }
  Point center() const {
    return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};
  }
  bool valid() const {
    return std::isfinite(min_x) && std::isfinite(min_y) &&
           std::isfinite(max_x) && std::isfinite(max_y) && max_x > min_x &&
           max_y > min_y;
  }
  bool contains(const Point& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

namespace detail {

struct Circumcircle {
  Point center;
  double radius_sq = 0.0;
};

// Circumcircle of a triangle; nullopt when the corners are collinear.
inline std::optional<Circumcircle> circumcircle(const Point& a, const Point& b,
                                                const Point& c) {
  const double d =
      2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  if (d == 0.0) return std::nullopt;
  const double a2 = a.x * a.x + a.y * a.y;
  const double b2 = b.x * b.x + b.y * b.y;
  const double c2 = c.x * c.x + c.y * c.y;
  Circumcircle out;
  out.center.x = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
  out.center.y = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
  if (!std::isfinite(out.center.x) || !std::isfinite(out.center.y)) {
    return std::nullopt;
  }
  const double dx = a.x - out.center.x;
  const double dy = a.y - out.center.y;
  out.radius_sq = dx * dx + dy * dy;
  return out;
}

// Liang-Barsky: restrict p(t) = origin + t*dir to the rectangle. Works for
// segments (t1 finite) and rays (t1 = +inf); nullopt when nothing remains.
inline std::optional<std::pair<double, double>> clip_parametric_to_rect(
    const Point& origin, double dx, double dy, double t0, double t1,
    const Rect& rect) {
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {origin.x - rect.min_x, rect.max_x - origin.x,
                       origin.y - rect.min_y, rect.max_y - origin.y};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
  }
  if (!(t0 < t1)) return std::nullopt;
  return std::make_pair(t0, t1);
}

// Same restriction against a closed disk.
inline std::optional<std::pair<double, double>> clip_parametric_to_disk(
    const Point& origin, double dx, double dy, double t0, double t1,
    const Point& center, double radius) {
  const double ox = origin.x - center.x;
  const double oy = origin.y - center.y;
  const double a = dx * dx + dy * dy;
  const double b = 2.0 * (ox * dx + oy * dy);
  const double c = ox * ox + oy * oy - radius * radius;
  if (a == 0.0) {
    if (c > 0.0) return std::nullopt;
    return std::make_pair(t0, t1);
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  t0 = std::max(t0, (-b - root) / (2.0 * a));
  t1 = std::min(t1, (-b + root) / (2.0 * a));
  if (!(t0 < t1)) return std::nullopt;
  return std::make_pair(t0, t1);
}

// Collects ridge segments into a graph, merging endpoints that coincide
// within the tolerance and dropping duplicate or zero-length edges.
class SegmentAccumulator {
 public:
  explicit SegmentAccumulator(double merge_tol = 1e-9) : tol_(merge_tol) {}

  int add_point(const Point& p) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (euclidean(points_[i], p) <= tol_) return static_cast<int>(i);
    }
    points_.push_back(p);
    return static_cast<int>(points_.size()) - 1;
  }

  void add_segment(const Point& a, const Point& b) {
    const int ia = add_point(a);
    const int ib = add_point(b);
    if (ia == ib) return;
    const auto key = std::minmax(ia, ib);
    if (!edge_keys_.insert(key).second) return;
    edges_.push_back({ia, ib, euclidean(points_[static_cast<std::size_t>(ia)],
                                        points_[static_cast<std::size_t>(ib)])});
  }

  WeightedGraph build() {
    return WeightedGraph(static_cast<int>(points_.size()), edges_, points_);
  }

 private:
  double tol_;
  std::vector<Point> points_;
  std::set<std::pair<int, int>> edge_keys_;
  std::vector<Edge> edges_;
};

}  // namespace detail

// Incremental Bowyer-Watson triangulation. Returns sorted vertex triples of
// the Delaunay triangles over the input indices. Quadratic per insertion,
// which is plenty at the scales this library targets.
inline std::vector<std::array<int, 3>> delaunay_triangulation(
    std::span<const Point> points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw GeometryError("delaunay: needs at least 3 points");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
      throw GeometryError("delaunay: non-finite point");
    }
    for (int j = i + 1; j < n; ++j) {
      if (euclidean(points[i], points[j]) <= 1e-9) {
        throw GeometryError("delaunay: duplicate points");
      }
    }
  }

  double min_x = points[0].x, max_x = points[0].x;
  double min_y = points[0].y, max_y = points[0].y;
  for (const Point& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
  const Point mid{0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};

  std::vector<Point> verts(points.begin(), points.end());
  verts.push_back({mid.x - 64.0 * span, mid.y - 32.0 * span});
  verts.push_back({mid.x + 64.0 * span, mid.y - 32.0 * span});
  verts.push_back({mid.x, mid.y + 64.0 * span});

  struct Tri {
    int a, b, c;
    detail::Circumcircle circle;
    bool degenerate = false;
    bool alive = true;
  };
  const auto make_tri = [&](int a, int b, int c) {
    Tri t{a, b, c, {}, false, true};
    const auto circle = detail::circumcircle(
        verts[static_cast<std::size_t>(a)], verts[static_cast<std::size_t>(b)],
        verts[static_cast<std::size_t>(c)]);
    if (circle) {
      t.circle = *circle;
    } else {
      t.degenerate = true;
    }
    return t;
  };

  std::vector<Tri> tris;
  tris.push_back(make_tri(n, n + 1, n + 2));

  for (int p = 0; p < n; ++p) {
    const Point& q = verts[static_cast<std::size_t>(p)];
    std::map<std::pair<int, int>, int> edge_count;
    for (Tri& t : tris) {
      if (!t.alive) continue;
      const double dx = q.x - t.circle.center.x;
      const double dy = q.y - t.circle.center.y;
      const bool bad = t.degenerate || dx * dx + dy * dy < t.circle.radius_sq;
      if (!bad) continue;
      t.alive = false;
      ++edge_count[std::minmax(t.a, t.b)];
      ++edge_count[std::minmax(t.b, t.c)];
      ++edge_count[std::minmax(t.a, t.c)];
    }
    for (const auto& [edge, count] : edge_count) {
      if (count == 1) tris.push_back(make_tri(edge.first, edge.second, p));
    }
  }

  std::vector<std::array<int, 3>> out;
  for (const Tri& t : tris) {
    if (!t.alive || t.degenerate) continue;
    if (t.a >= n || t.b >= n || t.c >= n) continue;
    std::array<int, 3> tri{t.a, t.b, t.c};
    std::sort(tri.begin(), tri.end());
    out.push_back(tri);
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw GeometryError("delaunay: all points collinear");
  return out;
}

// Voronoi diagram of the trees as a navigable graph: nodes are Voronoi
// vertices (triangle circumcenters), edges are finite ridge segments
// weighted by Euclidean length. With clip set, ridges are truncated at the
// rectangle and the cut points become boundary nodes; unbounded ridges are
// dropped otherwise.
inline WeightedGraph voronoi_graph(std::span<const Point> trees,
                                   const Rect& bounds, bool clip) {
  if (clip && !bounds.valid()) {
    throw GeometryError("voronoi: invalid clip bounds");
  }
  const auto tris = delaunay_triangulation(trees);

  std::vector<Point> centers(tris.size());
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const auto circle = detail::circumcircle(trees[tris[i][0]], trees[tris[i][1]],
                                             trees[tris[i][2]]);
    if (!circle) throw InternalError("voronoi: degenerate kept triangle");
    centers[i] = circle->center;
  }

  std::map<std::pair<int, int>, std::vector<int>> ridge_tris;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    const auto& t = tris[i];
    ridge_tris[{t[0], t[1]}].push_back(static_cast<int>(i));
    ridge_tris[{t[1], t[2]}].push_back(static_cast<int>(i));
    ridge_tris[{t[0], t[2]}].push_back(static_cast<int>(i));
  }

  detail::SegmentAccumulator acc;
  if (!clip) {
    for (const Point& c : centers) acc.add_point(c);
  }
  for (const auto& [ridge, owners] : ridge_tris) {
    if (owners.size() > 2) throw InternalError("voronoi: overfull ridge");
    if (owners.size() == 2) {
      const Point a = centers[static_cast<std::size_t>(owners[0])];
      const Point b = centers[static_cast<std::size_t>(owners[1])];
      if (!clip) {
        acc.add_segment(a, b);
        continue;
      }
      const auto span = detail::clip_parametric_to_rect(a, b.x - a.x,
                                                        b.y - a.y, 0.0, 1.0,
                                                        bounds);
      if (!span) continue;
      const auto [t0, t1] = *span;
      acc.add_segment({a.x + t0 * (b.x - a.x), a.y + t0 * (b.y - a.y)},
                      {a.x + t1 * (b.x - a.x), a.y + t1 * (b.y - a.y)});
      continue;
    }
    if (!clip) continue;

    // Hull ridge: a ray along the perpendicular bisector of the generator
    // pair, away from the triangle's remaining corner.
    const auto& tri = tris[static_cast<std::size_t>(owners[0])];
    int other = tri[0];
    for (int v : tri) {
      if (v != ridge.first && v != ridge.second) other = v;
    }
    const Point& u = trees[static_cast<std::size_t>(ridge.first)];
    const Point& v = trees[static_cast<std::size_t>(ridge.second)];
    const Point& w = trees[static_cast<std::size_t>(other)];
    const Point m{0.5 * (u.x + v.x), 0.5 * (u.y + v.y)};
    double dx = -(v.y - u.y);
    double dy = v.x - u.x;
    if (dx * (m.x - w.x) + dy * (m.y - w.y) < 0.0) {
      dx = -dx;
      dy = -dy;
    }
    const Point origin = centers[static_cast<std::size_t>(owners[0])];
    const auto span = detail::clip_parametric_to_rect(
        origin, dx, dy, 0.0, std::numeric_limits<double>::infinity(), bounds);
    if (!span) continue;
    const auto [t0, t1] = *span;
    acc.add_segment({origin.x + t0 * dx, origin.y + t0 * dy},
                    {origin.x + t1 * dx, origin.y + t1 * dy});
  }
  return acc.build();
}

}  // namespace dpp

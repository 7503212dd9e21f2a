#include "dpp/voronoi.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "dpp/rng.hpp"

namespace dpp {
namespace {

std::vector<Point> random_points(Rng& rng, int n, const Rect& bounds,
                                 double min_sep) {
  std::vector<Point> pts;
  int guard = 0;
  while (static_cast<int>(pts.size()) < n && ++guard < 100000) {
    Point p{rng.uniform(bounds.min_x, bounds.max_x),
            rng.uniform(bounds.min_y, bounds.max_y)};
    const bool close = std::any_of(pts.begin(), pts.end(), [&](const Point& q) {
      return euclidean(p, q) < min_sep;
    });
    if (!close) pts.push_back(p);
  }
  EXPECT_EQ(static_cast<int>(pts.size()), n);
  return pts;
}

// Gift-wrapping convex hull size, counting collinear hull points once.
int convex_hull_size(const std::vector<Point>& pts) {
  const auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  int start = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i) {
    if (pts[i].x < pts[start].x ||
        (pts[i].x == pts[start].x && pts[i].y < pts[start].y)) {
      start = i;
    }
  }
  int count = 0;
  int current = start;
  do {
    ++count;
    int next = (current + 1) % static_cast<int>(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      if (i == current) continue;
      const double c = cross(pts[current], pts[i], pts[next]);
      if (c > 0.0 ||
          (c == 0.0 && euclidean(pts[current], pts[i]) >
                           euclidean(pts[current], pts[next]))) {
        next = i;
      }
    }
    current = next;
  } while (current != start && count <= static_cast<int>(pts.size()));
  return count;
}

// Circumcenters whose circumcircle holds no other generator: the classic
// O(n^3) Voronoi vertex characterization, used as an oracle.
std::vector<Point> circumcenter_filter_vertices(const std::vector<Point>& pts) {
  std::vector<Point> out;
  const int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const auto circle = detail::circumcircle(pts[i], pts[j], pts[k]);
        if (!circle) continue;
        const double r = std::sqrt(circle->radius_sq);
        bool empty = true;
        for (int m = 0; m < n && empty; ++m) {
          if (m == i || m == j || m == k) continue;
          if (euclidean(pts[m], circle->center) < r - 1e-9) empty = false;
        }
        if (!empty) continue;
        const bool seen =
            std::any_of(out.begin(), out.end(), [&](const Point& q) {
              return euclidean(q, circle->center) <= 1e-6;
            });
        if (!seen) out.push_back(circle->center);
      }
    }
  }
  return out;
}

bool on_border(const Point& p, const Rect& r, double tol) {
  return std::abs(p.x - r.min_x) <= tol || std::abs(p.x - r.max_x) <= tol ||
         std::abs(p.y - r.min_y) <= tol || std::abs(p.y - r.max_y) <= tol;
}

std::array<double, 2> two_nearest_tree_distances(const std::vector<Point>& trees,
                                                 const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  for (const Point& t : trees) {
    const double d = euclidean(t, p);
    if (d < best) {
      second = best;
      best = d;
    } else if (d < second) {
      second = d;
    }
  }
  return {best, second};
}

TEST(Delaunay, RejectsDegenerateInputs) {
  std::vector<Point> two = {{0.0, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(delaunay_triangulation(two), GeometryError);
  std::vector<Point> line = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
  EXPECT_THROW(delaunay_triangulation(line), GeometryError);
  std::vector<Point> dup = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
  EXPECT_THROW(delaunay_triangulation(dup), GeometryError);
}

TEST(Delaunay, EmptyCircumcirclesAndEulerCount) {
  const Rect bounds{0.0, 0.0, 30.0, 20.0};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Rng rng(seed);
    const auto pts = random_points(rng, 40, bounds, 0.5);
    const auto tris = delaunay_triangulation(pts);

    for (const auto& tri : tris) {
      const auto circle = detail::circumcircle(pts[tri[0]], pts[tri[1]], pts[tri[2]]);
      ASSERT_TRUE(circle.has_value());
      const double r = std::sqrt(circle->radius_sq);
      for (int m = 0; m < 40; ++m) {
        if (m == tri[0] || m == tri[1] || m == tri[2]) continue;
        EXPECT_GT(euclidean(pts[m], circle->center), r - 1e-9);
      }
    }

    const int hull = convex_hull_size(pts);
    EXPECT_EQ(static_cast<int>(tris.size()), 2 * 40 - 2 - hull);
  }
}

TEST(Voronoi, EquilateralTriangleYieldsCircumcenterVertex) {
  const double h = 2.0 / std::sqrt(3.0);
  const std::vector<Point> trees = {
      {0.0, h}, {-1.0, -h / 2.0}, {1.0, -h / 2.0}};
  ASSERT_NEAR(euclidean(trees[1], trees[2]), 2.0, 1e-12);
  ASSERT_NEAR(euclidean(trees[0], trees[1]), 2.0, 1e-12);

  const Rect bounds{-5.0, -5.0, 5.0, 5.0};
  const auto graph = voronoi_graph(trees, bounds, true);

  std::vector<NodeId> interior;
  for (NodeId v = 0; v < graph.node_count(); ++v) {
    if (!on_border(graph.coordinate(v), bounds, 1e-9)) interior.push_back(v);
  }
  ASSERT_EQ(interior.size(), 1u);
  const Point center = graph.coordinate(interior[0]);
  EXPECT_NEAR(center.x, 0.0, 1e-9);
  EXPECT_NEAR(center.y, 0.0, 1e-9);
  for (const Point& tree : trees) {
    EXPECT_NEAR(euclidean(center, tree), h, 1e-9);
  }
  EXPECT_EQ(graph.node_count(), 4);
  EXPECT_EQ(graph.degree(interior[0]), 3);
}

TEST(Voronoi, RidgeSamplesAreEquidistantFromTwoNearestTrees) {
  const Rect bounds{0.0, 0.0, 30.0, 20.0};
  for (std::uint64_t seed = 11; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto trees = random_points(rng, 40, bounds, 0.8);
    const auto graph = voronoi_graph(trees, bounds, true);
    ASSERT_GT(graph.node_count(), 0);

    for (NodeId u = 0; u < graph.node_count(); ++u) {
      for (const auto& nb : graph.neighbors(u)) {
        if (nb.node < u) continue;
        const Point a = graph.coordinate(u);
        const Point b = graph.coordinate(nb.node);
        for (double t : {0.1, 0.35, 0.5, 0.65, 0.9}) {
          const Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
          const auto dists = two_nearest_tree_distances(trees, p);
          EXPECT_NEAR(dists[0], dists[1], 1e-9);
        }
      }
    }
  }
}

TEST(Voronoi, VertexSetMatchesCircumcenterFilterOracle) {
  const Rect bounds{0.0, 0.0, 30.0, 20.0};
  for (std::uint64_t seed = 31; seed <= 33; ++seed) {
    Rng rng(seed);
    const auto trees = random_points(rng, 50, bounds, 0.5);
    const auto graph = voronoi_graph(trees, bounds, false);
    const auto expected = circumcenter_filter_vertices(trees);

    ASSERT_EQ(static_cast<std::size_t>(graph.node_count()), expected.size());
    for (const Point& want : expected) {
      bool found = false;
      for (NodeId v = 0; v < graph.node_count() && !found; ++v) {
        found = euclidean(graph.coordinate(v), want) <= 1e-6;
      }
      EXPECT_TRUE(found) << "missing vertex near (" << want.x << ", " << want.y
                         << ")";
    }
  }
}

TEST(Voronoi, ClippedGraphStaysInsideBoundsAndKeepsInteriorVertices) {
  const Rect bounds{0.0, 0.0, 30.0, 20.0};
  Rng rng(77);
  const auto trees = random_points(rng, 45, bounds, 0.8);
  const auto clipped = voronoi_graph(trees, bounds, true);
  const auto open = voronoi_graph(trees, bounds, false);

  for (NodeId v = 0; v < clipped.node_count(); ++v) {
    const Point p = clipped.coordinate(v);
    EXPECT_GE(p.x, bounds.min_x - 1e-9);
    EXPECT_LE(p.x, bounds.max_x + 1e-9);
    EXPECT_GE(p.y, bounds.min_y - 1e-9);
    EXPECT_LE(p.y, bounds.max_y + 1e-9);
    EXPECT_GE(clipped.degree(v), 1);
    for (const auto& nb : clipped.neighbors(v)) {
      EXPECT_NEAR(nb.weight,
                  euclidean(clipped.coordinate(v), clipped.coordinate(nb.node)),
                  1e-12);
    }
  }

  for (NodeId v = 0; v < open.node_count(); ++v) {
    const Point p = open.coordinate(v);
    if (!bounds.contains(p)) continue;
    bool found = false;
    for (NodeId u = 0; u < clipped.node_count() && !found; ++u) {
      found = euclidean(clipped.coordinate(u), p) <= 1e-9;
    }
    EXPECT_TRUE(found) << "interior vertex lost at (" << p.x << ", " << p.y
                       << ")";
  }
}

TEST(Voronoi, EveryNodeIsEquidistantFromItsTwoNearestTrees) {
  const Rect bounds{0.0, 0.0, 30.0, 20.0};
  for (std::uint64_t seed = 41; seed <= 45; ++seed) {
    Rng rng(seed);
    const auto trees = random_points(rng, 35, bounds, 0.8);
    for (bool clip : {false, true}) {
      const auto graph = voronoi_graph(trees, bounds, clip);
      for (NodeId v = 0; v < graph.node_count(); ++v) {
        const auto dists = two_nearest_tree_distances(trees, graph.coordinate(v));
        EXPECT_NEAR(dists[0], dists[1], 1e-9);
      }
    }
  }
}

TEST(DiskClip, ParametricIntervalsMatchGeometry) {
  const Point c{0.0, 0.0};
  const auto cross = detail::clip_parametric_to_disk({-2.0, 0.0}, 4.0, 0.0,
                                                     0.0, 1.0, c, 1.0);
  ASSERT_TRUE(cross.has_value());
  EXPECT_NEAR(cross->first, 0.25, 1e-12);
  EXPECT_NEAR(cross->second, 0.75, 1e-12);

  EXPECT_FALSE(detail::clip_parametric_to_disk({-2.0, 2.0}, 4.0, 0.0, 0.0, 1.0,
                                               c, 1.0)
                   .has_value());

  const auto inside = detail::clip_parametric_to_disk({-0.3, 0.0}, 0.6, 0.0,
                                                      0.0, 1.0, c, 1.0);
  ASSERT_TRUE(inside.has_value());
  EXPECT_DOUBLE_EQ(inside->first, 0.0);
  EXPECT_DOUBLE_EQ(inside->second, 1.0);

  const auto ray = detail::clip_parametric_to_rect(
      {1.0, 1.0}, 1.0, 0.0, 0.0, std::numeric_limits<double>::infinity(),
      Rect{0.0, 0.0, 4.0, 4.0});
  ASSERT_TRUE(ray.has_value());
  EXPECT_DOUBLE_EQ(ray->first, 0.0);
  EXPECT_DOUBLE_EQ(ray->second, 3.0);
}

}  // namespace
}  // namespace dpp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "errw/geometry.hpp"

using namespace errw;

TEST_CASE("point helpers") {
  Point p{3, -4, 0};
  CHECK(l1_norm(p) == 7);
  CHECK(sup_norm(p) == 4);
  CHECK(l2_norm(p) == doctest::Approx(5.0));
  CHECK(sub(Point{1, 2}, Point{3, 5}) == Point{-2, -3});
  CHECK(l2_dist(Point{0, 0}, Point{3, 4}) == doctest::Approx(5.0));
}

TEST_CASE("graph factories") {
  Graph e = Graph::single_edge();
  CHECK(e.n == 2);
  CHECK(e.edges.size() == 1);
  CHECK(e.edge_between(0, 1) == 0);
  CHECK(e.edge_between(1, 0) == 0);

  Graph p = Graph::path(5);
  CHECK(p.edges.size() == 4);
  CHECK(p.connected());
  CHECK(p.degree(0) == 1);
  CHECK(p.degree(2) == 2);

  Graph c = Graph::cycle(4);
  CHECK(c.edges.size() == 4);
  CHECK(c.degree(0) == 2);
  CHECK(c.edge_between(0, 3) >= 0);

  Graph q = Graph::hypercube(3);
  CHECK(q.n == 8);
  CHECK(q.edges.size() == 12);
  for (int v = 0; v < q.n; ++v) CHECK(q.degree(v) == 3);
  CHECK(q.connected());
  CHECK(q.edge_between(0, 3) == -1);  // differs in two bits
}

TEST_CASE("graph finalize validation") {
  Graph g;
  g.n = 2;
  g.edges = {{0, 2}};
  CHECK_THROWS_AS(g.finalize(), std::invalid_argument);
  g.edges = {{1, 1}};
  CHECK_THROWS_AS(g.finalize(), std::invalid_argument);
}

TEST_CASE("lattice box indexing and boundary") {
  LatticeBox b2(2, 1);
  CHECK(b2.vertex_count() == 9);
  CHECK((int)b2.boundary_indices().size() == 8);
  CHECK(b2.point_of(b2.center_index()) == Point{0, 0});
  for (int i = 0; i < 9; ++i) CHECK(b2.index_of(b2.point_of(i)) == i);
  CHECK(b2.contains(Point{1, -1}));
  CHECK(!b2.contains(Point{2, 0}));
  CHECK(b2.on_boundary(Point{1, 0}));
  CHECK(!b2.on_boundary(Point{0, 0}));
  CHECK_THROWS_AS(b2.index_of(Point{2, 0}), std::invalid_argument);

  Graph g2 = b2.graph();
  CHECK(g2.n == 9);
  CHECK(g2.edges.size() == 12);  // d * 2n * (2n+1)^(d-1)
  CHECK(g2.connected());

  LatticeBox b3(3, 2);
  CHECK(b3.vertex_count() == 125);
  CHECK((int)b3.boundary_indices().size() == 125 - 27);
  CHECK(b3.graph().edges.size() == 3u * 4u * 25u);
}

TEST_CASE("cone membership") {
  Cone quarter = make_cone(Point{0, 0, 0}, {1.0, 0.0, 0.0}, cos_quarter_pi());
  CHECK(cone_contains(quarter, Point{0, 0, 0}));  // apex
  CHECK(cone_contains(quarter, Point{5, 0, 0}));
  CHECK(cone_contains(quarter, Point{1, 1, 0}));  // exactly on the boundary
  CHECK(!cone_contains(quarter, Point{1, 2, 0}));
  CHECK(!cone_contains(quarter, Point{-1, 0, 0}));

  Cone narrow = make_cone(Point{0, 0, 0}, {1.0, 0.0, 0.0}, cos_pi_over_16());
  CHECK(!cone_contains(narrow, Point{1, 1, 0}));
  CHECK(cone_contains(narrow, Point{10, 1, 0}));  // atan(1/10) < pi/16

  CHECK_THROWS_AS(make_cone(Point{0, 0}, {0.0, 0.0}, 0.5), std::invalid_argument);
  CHECK(cos_pi_over_8() == doctest::Approx(std::cos(std::acos(-1.0) / 8.0)));
}

TEST_CASE("projection coordinates") {
  Point x{0, 0, 0}, y{4, 0, 0};
  CHECK(projection_coordinates(x, y, x).r == doctest::Approx(0.0));
  CHECK(projection_coordinates(x, y, y).r == doctest::Approx(1.0));
  ProjectionCoords m = projection_coordinates(x, y, Point{2, 3, -1});
  CHECK(m.r == doctest::Approx(0.5));
  CHECK(m.p[0] == doctest::Approx(2.0));
  CHECK(m.p[1] == doctest::Approx(0.0));
  // residual is orthogonal to the axis
  Point z{1, 2, 2};
  ProjectionCoords pc = projection_coordinates(Point{0, 0, 0}, Point{2, 1, 0}, z);
  double dot = 0;
  for (int k = 0; k < 3; ++k) dot += (z[(size_t)k] - pc.p[(size_t)k]) * (double)(Point{2, 1, 0}[(size_t)k]);
  CHECK(std::abs(dot) < 1e-9);
}

static double seg_dist(const Point& p, const Point& a, const Point& b) {
  ProjectionCoords pc = projection_coordinates(a, b, p);
  double r = std::min(1.0, std::max(0.0, pc.r));
  double d2 = 0;
  for (size_t k = 0; k < p.size(); ++k) {
    double comp = a[k] + r * (b[k] - a[k]) - p[k];
    d2 += comp * comp;
  }
  return std::sqrt(d2);
}

TEST_CASE("segment rasterization") {
  Point a{0, 0, 0}, b{5, 3, -2};
  std::vector<Point> path = rasterize_segment(a, b);
  CHECK(path.front() == a);
  CHECK(path.back() == b);
  CHECK((int)path.size() == l1_norm(sub(b, a)) + 1);
  for (size_t i = 1; i < path.size(); ++i)
    CHECK(l1_norm(sub(path[i], path[i - 1])) == 1);
  for (const Point& p : path) {
    int cheb = 0;
    ProjectionCoords pc = projection_coordinates(a, b, p);
    for (size_t k = 0; k < p.size(); ++k)
      cheb = std::max(cheb, (int)std::ceil(std::abs(p[k] - pc.p[k]) - 1e-9));
    CHECK(cheb <= 1);
  }
  CHECK(rasterize_segment(a, b) == path);  // deterministic
  CHECK(rasterize_segment(a, a) == std::vector<Point>{a});
}

TEST_CASE("exact diamond structure") {
  Point x{0, 0, 0}, y{8, 0, 0};
  Diamond d = build_diamond(DiamondKind::Exact, x, y);
  CHECK(d.is_member(x));
  CHECK(d.is_member(y));
  CHECK(d.x_index() == d.index_of(x));
  CHECK(d.y_index() == d.index_of(y));
  CHECK(std::is_sorted(d.members.begin(), d.members.end()));
  CHECK(std::adjacent_find(d.members.begin(), d.members.end()) == d.members.end());
  for (const Point& p : d.patch_points) CHECK(d.is_member(p));
  CHECK(!d.is_member(Point{-1, 0, 0}));
  CHECK(d.index_of(Point{-1, 0, 0}) == -1);

  Graph g = d.graph();
  CHECK(g.n == (int)d.members.size());
  CHECK(g.connected());

  // midpoint of the axis is well inside both quarter-angle cones
  CHECK(d.is_member(Point{4, 0, 0}));
  CHECK(d.is_member(Point{4, 2, 0}));
}

TEST_CASE("deformed diamond structure") {
  Point x{0, 0, 0}, y{10, 0, 0};
  Diamond d = build_diamond(DiamondKind::Deformed, x, y, {1.0, 0.0, 0.0});
  CHECK(d.is_member(x));
  CHECK(d.is_member(y));
  CHECK(d.graph().connected());
  // the narrow cone keeps wide off-axis points out
  CHECK(!d.is_member(Point{5, 5, 0}));
  // axis that misses y is rejected
  CHECK_THROWS_AS(build_diamond(DiamondKind::Deformed, x, y, {0.0, 1.0, 0.0}),
                  std::invalid_argument);
  // raw members of the deformed shape lie in the wide cones when axes agree
  Diamond wide = build_diamond(DiamondKind::Exact, x, y);
  Cone cx = make_cone(x, {1.0, 0.0, 0.0}, cos_quarter_pi());
  Cone cy = make_cone(y, {-1.0, 0.0, 0.0}, cos_quarter_pi());
  int inside = 0;
  for (const Point& p : d.members)
    if (cone_contains(cx, p) && cone_contains(cy, p)) ++inside;
  CHECK(inside >= (int)(d.members.size() - d.patch_points.size()));
  CHECK(wide.members.size() >= d.members.size() - d.patch_points.size());
}

TEST_CASE("diamond split coverage and validation") {
  // the ball split contract is calibrated for the narrow deformed shape; the
  // wide pi/4 diamond has waist points ~0.707 len from both apexes
  for (int len : {5, 10, 20, 40}) {
    Point x(3, 0), y(3, 0);
    y[0] = len;
    Diamond d = build_diamond(DiamondKind::Deformed, x, y);
    DiamondSplit s = split_diamond(d, 0.6, 0.6);
    std::set<int> covered(s.x_side.begin(), s.x_side.end());
    covered.insert(s.y_side.begin(), s.y_side.end());
    CHECK((int)covered.size() == (int)d.members.size());
    CHECK(std::count(s.x_side.begin(), s.x_side.end(), d.x_index()) == 1);
    CHECK(std::count(s.y_side.begin(), s.y_side.end(), d.y_index()) == 1);
  }
  Diamond d = build_diamond(DiamondKind::Exact, Point{0, 0}, Point{6, 0});
  CHECK_THROWS_AS(split_diamond(d, 0.1, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(split_diamond(d, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("subcube tree counts and enumeration") {
  SubcubeTree t1 = subcube_tree(3, 1, Point{0, 0, 0});
  CHECK((int)t1.nodes.size() == 9);
  CHECK(t1.admissible_tree_count() == 2);
  CHECK(t1.nodes[0].low == Point{-2, -2, -2});
  CHECK(t1.nodes[0].side == 4);
  CHECK((int)t1.cube_points(0).size() == 64);
  for (int c : t1.nodes[0].children) {
    CHECK(t1.nodes[(size_t)c].side == 1);
    for (const Point& p : t1.cube_points(c)) {
      for (int k = 0; k < 3; ++k) {
        CHECK(p[(size_t)k] >= -2);
        CHECK(p[(size_t)k] <= 1);
        CHECK((p[(size_t)k] == -2 || p[(size_t)k] == 1));  // corner cells
      }
    }
  }
  std::vector<std::vector<int>> leafsets = t1.enumerate_leaf_sets();
  CHECK(leafsets.size() == 2);
  std::set<size_t> sizes;
  for (const auto& ls : leafsets) sizes.insert(ls.size());
  CHECK(sizes == std::set<size_t>{1, 8});

  SubcubeTree t2 = subcube_tree(3, 2, Point{0, 0, 0});
  CHECK((int)t2.nodes.size() == 1 + 8 + 64);
  CHECK(t2.admissible_tree_count() == 257);
  CHECK(t2.enumerate_leaf_sets().size() == 257);

  CHECK(subcube_tree(2, 2, Point{0, 0}).admissible_tree_count() == 17);
  CHECK(subcube_tree(2, 3, Point{0, 0}).admissible_tree_count() == 83522);
}

TEST_CASE("point file round trip") {
  std::vector<Point> pts = {{0, 1, -2}, {3, 3, 3}, {-5, 0, 7}};
  std::stringstream ss;
  write_points(ss, pts);
  CHECK(read_points(ss, 3) == pts);
}

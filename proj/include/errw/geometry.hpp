#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace errw {

using Point = std::vector<int>;

int l1_norm(const Point& p);
int sup_norm(const Point& p);
double l2_norm(const Point& p);
Point sub(const Point& a, const Point& b);
double l2_dist(const Point& a, const Point& b);

// Plain undirected graph; parallel edges allowed (conductances add).
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;                 // stored orientation first->second
  std::vector<std::vector<std::pair<int, int>>> adj;      // vertex -> (neighbor, edge id)

  void finalize();  // builds adj; validates endpoint range
  int degree(int v) const { return (int)adj[v].size(); }
  bool connected() const;
  int edge_between(int i, int j) const;  // first matching edge id or -1

  static Graph single_edge();
  static Graph path(int vertices);
  static Graph cycle(int vertices);
  static Graph hypercube(int dim);  // {0,1}^dim with unit steps
};

// V_n in Z^d: vertices with sup-norm <= n, nearest-neighbor edges,
// boundary = sup-norm exactly n. Vertex ids are mixed-radix over coordinates.
struct LatticeBox {
  int dim = 0;
  int radius = 0;

  LatticeBox(int d, int n);
  int64_t vertex_count() const;  // (2n+1)^d
  int index_of(const Point& p) const;  // throws if outside
  Point point_of(int idx) const;
  bool contains(const Point& p) const;
  bool on_boundary(const Point& p) const;
  std::vector<int> boundary_indices() const;
  int center_index() const;  // the origin
  Graph graph() const;
  std::vector<Point> all_points() const;
};

// Closed cone at a real apex: z is inside when the angle between z-apex and
// dir is at most the half-angle. Boundary points count as members; the
// comparison carries a small relative slack so exact-angle lattice points
// are not lost to rounding.
struct Cone {
  std::vector<double> apex;
  std::vector<double> dir;        // need not be normalized
  double cos_half_angle = 0.0;
};

Cone make_cone(const Point& apex, const std::vector<double>& dir, double cos_half_angle);
bool cone_contains(const Cone& c, const Point& z);
bool cone_contains_real(const Cone& c, const std::vector<double>& z);

double cos_quarter_pi();     // exact-diamond half-angle
double cos_pi_over_16();     // deformed-diamond half-angle
double cos_pi_over_8();

enum class DiamondKind { Exact, Deformed };

// Lattice diamond between apexes x and y: intersection of the two cones,
// plus deterministic patch points making the member set connected. Members
// are sorted lexicographically; patch_points is the subset not in the raw
// cone intersection.
struct Diamond {
  DiamondKind kind = DiamondKind::Exact;
  Point x, y;
  std::vector<double> axis;  // cone direction at x (y-x for exact diamonds)
  std::vector<Point> members;
  std::vector<Point> patch_points;

  int dim() const { return (int)x.size(); }
  bool is_member(const Point& p) const;
  int index_of(const Point& p) const;  // position in members, -1 if absent
  int x_index() const;
  int y_index() const;
  Graph graph() const;  // nearest-neighbor graph on members
};

// l is the cone direction at x for deformed diamonds (must contain y);
// ignored for exact diamonds where it is always y-x.
Diamond build_diamond(DiamondKind kind, const Point& x, const Point& y,
                      std::vector<double> l = {});

// Ball split: x_side = members within fx*|y-x| of x, y_side within fy*|y-x|
// of y. Requires 1/5 <= fx, fy <= 1 and fx+fy >= 6/5; throws if the union
// fails to cover the members (geometry bug).
struct DiamondSplit {
  std::vector<int> x_side, y_side;  // member indices, may overlap
};
DiamondSplit split_diamond(const Diamond& d, double fx, double fy);

// r = position of z's projection along the segment x->y (0 at x, 1 at y),
// p = the projected point itself.
struct ProjectionCoords {
  double r;
  std::vector<double> p;
};
ProjectionCoords projection_coordinates(const Point& x, const Point& y, const Point& z);
ProjectionCoords projection_coordinates_real(const Point& x, const Point& y,
                                             const std::vector<double>& z);

// Monotone lattice staircase from a to b tracking the straight segment
// (every visited point is within Chebyshev distance 1 of the segment).
// Crossing ties break by axis index, so the path is deterministic.
std::vector<Point> rasterize_segment(const Point& a, const Point& b);

// Hypercube of side 4^n around a center point, recursively split into the
// 2^d corner sub-hypercubes of side 4^(n-1) down to single points. The
// center sits at offset side/2 in each coordinate (sides are even for
// n >= 1, so the barycenter itself is between lattice points).
struct SubcubeNode {
  Point low;
  int side = 1;
  int depth = 0;
  std::vector<int> children;  // node ids; empty at depth == scale
};

struct SubcubeTree {
  int dim = 0;
  int scale = 0;  // n
  Point center;
  std::vector<SubcubeNode> nodes;  // node 0 is the root

  std::vector<Point> cube_points(int node) const;
  // Number of admissible subtrees (every vertex keeps 0 or 2^d children).
  long long admissible_tree_count() const;
  // All admissible leaf-sets, as vectors of node ids; throws when the count
  // exceeds cap (exhaustive enumeration is meant for small n).
  std::vector<std::vector<int>> enumerate_leaf_sets(long long cap = 1000000) const;
};

SubcubeTree subcube_tree(int dim, int n, const Point& center);

// Line-oriented text export: one point per line, coordinates space-separated.
void write_points(std::ostream& os, const std::vector<Point>& pts);
std::vector<Point> read_points(std::istream& is, int dim);

}  // namespace errw

#include "errw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace errw {

int l1_norm(const Point& p) {
  int s = 0;
  for (int v : p) s += std::abs(v);
  return s;
}

int sup_norm(const Point& p) {
  int s = 0;
  for (int v : p) s = std::max(s, std::abs(v));
  return s;
}

double l2_norm(const Point& p) {
  double s = 0;
  for (int v : p) s += (double)v * v;
  return std::sqrt(s);
}

Point sub(const Point& a, const Point& b) {
  Point r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
  return r;
}

double l2_dist(const Point& a, const Point& b) { return l2_norm(sub(a, b)); }

void Graph::finalize() {
  adj.assign((size_t)n, {});
  for (int e = 0; e < (int)edges.size(); ++e) {
    auto [i, j] = edges[(size_t)e];
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument("Graph: edge endpoint out of range");
    if (i == j) throw std::invalid_argument("Graph: self-loop not allowed");
    adj[(size_t)i].push_back({j, e});
    adj[(size_t)j].push_back({i, e});
  }
}

bool Graph::connected() const {
  if (n == 0) return true;
  std::vector<char> seen((size_t)n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int cnt = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (auto [w, e] : adj[(size_t)v]) {
      (void)e;
      if (!seen[(size_t)w]) {
        seen[(size_t)w] = 1;
        ++cnt;
        q.push(w);
      }
    }
  }
  return cnt == n;
}

int Graph::edge_between(int i, int j) const {
  for (auto [w, e] : adj[(size_t)i])
    if (w == j) return e;
  return -1;
}

Graph Graph::single_edge() {
  Graph g;
  g.n = 2;
  g.edges = {{0, 1}};
  g.finalize();
  return g;
}

Graph Graph::path(int vertices) {
  Graph g;
  g.n = vertices;
  for (int i = 0; i + 1 < vertices; ++i) g.edges.push_back({i, i + 1});
  g.finalize();
  return g;
}

Graph Graph::cycle(int vertices) {
  Graph g = path(vertices);
  if (vertices >= 3) g.edges.push_back({0, vertices - 1});
  g.finalize();
  return g;
}

Graph Graph::hypercube(int dim) {
  Graph g;
  g.n = 1 << dim;
  for (int v = 0; v < g.n; ++v)
    for (int k = 0; k < dim; ++k)
      if (!(v & (1 << k))) g.edges.push_back({v, v | (1 << k)});
  g.finalize();
  return g;
}

LatticeBox::LatticeBox(int d, int n) : dim(d), radius(n) {
  if (d < 1) throw std::invalid_argument("LatticeBox: dim must be >= 1");
  if (n < 0) throw std::invalid_argument("LatticeBox: radius must be >= 0");
  double count = std::pow(2.0 * n + 1.0, d);
  if (count > 4e6) throw std::invalid_argument("LatticeBox: box too large");
}

int64_t LatticeBox::vertex_count() const {
  int64_t c = 1;
  for (int k = 0; k < dim; ++k) c *= (2 * radius + 1);
  return c;
}

bool LatticeBox::contains(const Point& p) const {
  if ((int)p.size() != dim) return false;
  return sup_norm(p) <= radius;
}

int LatticeBox::index_of(const Point& p) const {
  if (!contains(p)) throw std::invalid_argument("LatticeBox: point outside box");
  int64_t idx = 0, base = 1;
  for (int k = 0; k < dim; ++k) {
    idx += (int64_t)(p[(size_t)k] + radius) * base;
    base *= (2 * radius + 1);
  }
  return (int)idx;
}

Point LatticeBox::point_of(int idx) const {
  if (idx < 0 || (int64_t)idx >= vertex_count())
    throw std::invalid_argument("LatticeBox: index out of range");
  Point p((size_t)dim);
  int side = 2 * radius + 1;
  for (int k = 0; k < dim; ++k) {
    p[(size_t)k] = idx % side - radius;
    idx /= side;
  }
  return p;
}

bool LatticeBox::on_boundary(const Point& p) const {
  return contains(p) && sup_norm(p) == radius;
}

std::vector<int> LatticeBox::boundary_indices() const {
  std::vector<int> out;
  for (int i = 0; i < (int)vertex_count(); ++i)
    if (sup_norm(point_of(i)) == radius) out.push_back(i);
  return out;
}

int LatticeBox::center_index() const { return index_of(Point((size_t)dim, 0)); }

Graph LatticeBox::graph() const {
  Graph g;
  g.n = (int)vertex_count();
  for (int i = 0; i < g.n; ++i) {
    Point p = point_of(i);
    for (int k = 0; k < dim; ++k) {
      Point q = p;
      q[(size_t)k] += 1;
      if (contains(q)) g.edges.push_back({i, index_of(q)});
    }
  }
  g.finalize();
  return g;
}

std::vector<Point> LatticeBox::all_points() const {
  std::vector<Point> pts;
  pts.reserve((size_t)vertex_count());
  for (int i = 0; i < (int)vertex_count(); ++i) pts.push_back(point_of(i));
  return pts;
}

double cos_quarter_pi() { return std::sqrt(0.5); }
double cos_pi_over_16() { return std::cos(std::acos(-1.0) / 16.0); }
double cos_pi_over_8() { return std::cos(std::acos(-1.0) / 8.0); }

Cone make_cone(const Point& apex, const std::vector<double>& dir, double cos_half_angle) {
  if (apex.size() != dir.size()) throw std::invalid_argument("make_cone: dim mismatch");
  double norm = 0;
  for (double v : dir) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0)) throw std::invalid_argument("make_cone: zero direction");
  Cone c;
  c.apex.assign(apex.begin(), apex.end());
  c.dir.resize(dir.size());
  for (size_t k = 0; k < dir.size(); ++k) c.dir[k] = dir[k] / norm;
  c.cos_half_angle = cos_half_angle;
  return c;
}

bool cone_contains_real(const Cone& c, const std::vector<double>& z) {
  if (z.size() != c.apex.size()) throw std::invalid_argument("cone_contains: dim mismatch");
  double dot = 0, n2 = 0;
  for (size_t k = 0; k < z.size(); ++k) {
    double d = z[k] - c.apex[k];
    dot += d * c.dir[k];
    n2 += d * d;
  }
  double norm = std::sqrt(n2);
  if (norm == 0) return true;  // the apex belongs to the closed cone
  // boundary-inclusive with a relative slack against rounding, so lattice
  // points at exactly the half-angle stay members
  return dot >= c.cos_half_angle * norm - 1e-9 * (1.0 + norm);
}

bool cone_contains(const Cone& c, const Point& z) {
  std::vector<double> zr(z.begin(), z.end());
  return cone_contains_real(c, zr);
}

ProjectionCoords projection_coordinates_real(const Point& x, const Point& y,
                                             const std::vector<double>& z) {
  if (x.size() != y.size() || z.size() != x.size())
    throw std::invalid_argument("projection_coordinates: dim mismatch");
  double num = 0, den = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    double axis = (double)y[k] - x[k];
    num += (z[k] - x[k]) * axis;
    den += axis * axis;
  }
  if (!(den > 0)) throw std::invalid_argument("projection_coordinates: x == y");
  ProjectionCoords pc;
  pc.r = num / den;
  pc.p.resize(x.size());
  for (size_t k = 0; k < x.size(); ++k) pc.p[k] = x[k] + pc.r * ((double)y[k] - x[k]);
  return pc;
}

ProjectionCoords projection_coordinates(const Point& x, const Point& y, const Point& z) {
  std::vector<double> zr(z.begin(), z.end());
  return projection_coordinates_real(x, y, zr);
}

std::vector<Point> rasterize_segment(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw std::invalid_argument("rasterize_segment: dim mismatch");
  int d = (int)a.size();
  // walk the axis hyperplane crossings of the straight segment in time
  // order; ties break by axis index, so the staircase is deterministic and
  // stays within Chebyshev distance 1 of the segment
  struct Event {
    double t;
    int axis;
  };
  std::vector<Event> ev;
  for (int k = 0; k < d; ++k) {
    int delta = b[(size_t)k] - a[(size_t)k];
    for (int i = 1; i <= std::abs(delta); ++i)
      ev.push_back({((double)i - 0.5) / std::abs(delta), k});
  }
  std::stable_sort(ev.begin(), ev.end(), [](const Event& u, const Event& v) {
    if (u.t != v.t) return u.t < v.t;
    return u.axis < v.axis;
  });
  std::vector<Point> path;
  path.reserve(ev.size() + 1);
  Point p = a;
  path.push_back(p);
  for (const Event& e : ev) {
    p[(size_t)e.axis] += (b[(size_t)e.axis] > a[(size_t)e.axis]) ? 1 : -1;
    path.push_back(p);
  }
  return path;
}

namespace {

struct PointLess {
  bool operator()(const Point& a, const Point& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

using PointSet = std::set<Point, PointLess>;

// connected components under lattice adjacency; returned sorted by their
// lexicographically smallest point
std::vector<std::vector<Point>> lattice_components(const PointSet& pts) {
  std::map<Point, int, PointLess> comp;
  std::vector<std::vector<Point>> comps;
  for (const Point& start : pts) {
    if (comp.count(start)) continue;
    int id = (int)comps.size();
    comps.push_back({});
    std::queue<Point> q;
    q.push(start);
    comp[start] = id;
    while (!q.empty()) {
      Point v = q.front();
      q.pop();
      comps[(size_t)id].push_back(v);
      for (size_t k = 0; k < v.size(); ++k) {
        for (int dir = -1; dir <= 1; dir += 2) {
          Point w = v;
          w[k] += dir;
          if (pts.count(w) && !comp.count(w)) {
            comp[w] = id;
            q.push(w);
          }
        }
      }
    }
  }
  // BFS seeds iterate in lex order, so comps are already ordered by their
  // smallest point
  return comps;
}

}  // namespace

bool Diamond::is_member(const Point& p) const {
  return std::binary_search(members.begin(), members.end(), p, PointLess{});
}

int Diamond::index_of(const Point& p) const {
  auto it = std::lower_bound(members.begin(), members.end(), p, PointLess{});
  if (it == members.end() || *it != p) return -1;
  return (int)(it - members.begin());
}

int Diamond::x_index() const { return index_of(x); }
int Diamond::y_index() const { return index_of(y); }

Graph Diamond::graph() const {
  Graph g;
  g.n = (int)members.size();
  for (int i = 0; i < g.n; ++i) {
    for (size_t k = 0; k < members[(size_t)i].size(); ++k) {
      Point q = members[(size_t)i];
      q[k] += 1;
      int j = index_of(q);
      if (j >= 0) g.edges.push_back({i, j});
    }
  }
  g.finalize();
  return g;
}

Diamond build_diamond(DiamondKind kind, const Point& x, const Point& y,
                      std::vector<double> l) {
  if (x.size() != y.size()) throw std::invalid_argument("build_diamond: dim mismatch");
  int d = (int)x.size();
  if (d < 1) throw std::invalid_argument("build_diamond: dim must be >= 1");
  if (x == y) throw std::invalid_argument("build_diamond: apexes must differ");
  std::vector<double> y_minus_x(x.size());
  for (int k = 0; k < d; ++k) y_minus_x[(size_t)k] = (double)y[(size_t)k] - x[(size_t)k];
  if (kind == DiamondKind::Exact || l.empty()) l = y_minus_x;
  if ((int)l.size() != d) throw std::invalid_argument("build_diamond: axis dim mismatch");

  double cosA = kind == DiamondKind::Exact ? cos_quarter_pi() : cos_pi_over_16();
  Cone cone_x = make_cone(x, l, cosA);
  std::vector<double> x_minus_y(x.size());
  for (int k = 0; k < d; ++k) x_minus_y[(size_t)k] = -y_minus_x[(size_t)k];
  Cone cone_y = make_cone(y, x_minus_y, cosA);

  if (kind == DiamondKind::Deformed && !cone_contains(cone_x, y))
    throw std::invalid_argument("build_diamond: y outside the deformed cone at x");

  double len = l2_dist(x, y);
  int margin = (int)std::ceil((kind == DiamondKind::Exact ? 1.5 : 1.15) * len) + 2;
  Point lo(x.size()), hi(x.size());
  for (int k = 0; k < d; ++k) {
    lo[(size_t)k] = std::min(x[(size_t)k], y[(size_t)k]) - margin;
    hi[(size_t)k] = std::max(x[(size_t)k], y[(size_t)k]) + margin;
  }
  double cells = 1;
  for (int k = 0; k < d; ++k) cells *= (double)(hi[(size_t)k] - lo[(size_t)k] + 1);
  if (cells > 6e7) throw std::invalid_argument("build_diamond: apexes too far apart");

  PointSet raw;
  Point p = lo;
  for (;;) {
    if (cone_contains(cone_x, p) && cone_contains(cone_y, p)) raw.insert(p);
    int k = 0;
    while (k < d && p[(size_t)k] == hi[(size_t)k]) {
      p[(size_t)k] = lo[(size_t)k];
      ++k;
    }
    if (k == d) break;
    p[(size_t)k] += 1;
  }

  PointSet members = raw;
  // near-apex corridor along the straight segment: the thin cone holds no
  // lattice points close to an apex, and the corridor is shared between the
  // exact and deformed kinds so the deformed diamond stays inside the exact
  // one for l = y-x
  int k_pad = (int)std::ceil(5.2 * std::sqrt((double)d)) + 1;
  const Point& sa = PointLess{}(x, y) ? x : y;
  const Point& sb = PointLess{}(x, y) ? y : x;
  for (const Point& sp : rasterize_segment(sa, sb)) {
    if (std::min(l2_dist(sp, x), l2_dist(sp, y)) <= (double)k_pad) members.insert(sp);
  }

  // repair any remaining split: connect the component holding the smallest
  // point to its nearest outside member by a staircase, repeating until the
  // set is connected; pair ties break lexicographically
  for (;;) {
    auto comps = lattice_components(members);
    if (comps.size() <= 1) break;
    const auto& main = comps[0];
    double best = 1e300;
    Point bp, bq;
    for (size_t ci = 1; ci < comps.size(); ++ci) {
      for (const Point& pp : main) {
        for (const Point& qq : comps[ci]) {
          double dd = l2_dist(pp, qq);
          if (dd < best - 1e-12 ||
              (std::abs(dd - best) <= 1e-12 &&
               (PointLess{}(pp, bp) || (pp == bp && PointLess{}(qq, bq))))) {
            best = dd;
            bp = pp;
            bq = qq;
          }
        }
      }
    }
    for (const Point& sp : rasterize_segment(bp, bq)) members.insert(sp);
  }

  Diamond dm;
  dm.kind = kind;
  dm.x = x;
  dm.y = y;
  dm.axis = l;
  dm.members.assign(members.begin(), members.end());
  for (const Point& m : dm.members)
    if (!raw.count(m)) dm.patch_points.push_back(m);
  return dm;
}

DiamondSplit split_diamond(const Diamond& d, double fx, double fy) {
  const double eps = 1e-12;
  if (fx < 0.2 - eps || fx > 1.0 + eps || fy < 0.2 - eps || fy > 1.0 + eps)
    throw std::invalid_argument("split_diamond: fx, fy must lie in [1/5, 1]");
  if (fx + fy < 1.2 - eps)
    throw std::invalid_argument("split_diamond: fx + fy must be at least 6/5");
  double len = l2_dist(d.x, d.y);
  DiamondSplit sp;
  for (int i = 0; i < (int)d.members.size(); ++i) {
    bool in_x = l2_dist(d.members[(size_t)i], d.x) <= fx * len + 1e-9;
    bool in_y = l2_dist(d.members[(size_t)i], d.y) <= fy * len + 1e-9;
    if (in_x) sp.x_side.push_back(i);
    if (in_y) sp.y_side.push_back(i);
    if (!in_x && !in_y) {
      std::ostringstream os;
      os << "split_diamond: member not covered by either ball:";
      for (int v : d.members[(size_t)i]) os << ' ' << v;
      throw std::runtime_error(os.str());
    }
  }
  return sp;
}

SubcubeTree subcube_tree(int dim, int n, const Point& center) {
  if (dim < 1) throw std::invalid_argument("subcube_tree: dim must be >= 1");
  if (n < 0 || n > 8) throw std::invalid_argument("subcube_tree: scale must be in [0, 8]");
  if ((int)center.size() != dim) throw std::invalid_argument("subcube_tree: dim mismatch");
  SubcubeTree t;
  t.dim = dim;
  t.scale = n;
  t.center = center;
  int side = 1;
  for (int k = 0; k < n; ++k) side *= 4;
  SubcubeNode root;
  root.side = side;
  root.depth = 0;
  root.low.resize((size_t)dim);
  for (int k = 0; k < dim; ++k) root.low[(size_t)k] = center[(size_t)k] - side / 2;
  t.nodes.push_back(root);
  // expand depth-first; children ordered by corner bitmask
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    SubcubeNode node = t.nodes[(size_t)id];
    if (node.depth == n) continue;
    int cs = node.side / 4;
    for (int mask = 0; mask < (1 << dim); ++mask) {
      SubcubeNode ch;
      ch.side = cs;
      ch.depth = node.depth + 1;
      ch.low.resize((size_t)dim);
      for (int k = 0; k < dim; ++k)
        ch.low[(size_t)k] =
            node.low[(size_t)k] + (((mask >> k) & 1) ? node.side - cs : 0);
      int cid = (int)t.nodes.size();
      t.nodes.push_back(ch);
      t.nodes[(size_t)id].children.push_back(cid);
      stack.push_back(cid);
    }
  }
  return t;
}

std::vector<Point> SubcubeTree::cube_points(int node) const {
  const SubcubeNode& nd = nodes[(size_t)node];
  std::vector<Point> pts;
  Point p = nd.low;
  for (;;) {
    pts.push_back(p);
    int k = 0;
    while (k < dim && p[(size_t)k] == nd.low[(size_t)k] + nd.side - 1) {
      p[(size_t)k] = nd.low[(size_t)k];
      ++k;
    }
    if (k == dim) break;
    p[(size_t)k] += 1;
  }
  return pts;
}

namespace {

long long saturating_pow(long long base, int exp) {
  __int128 r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > (__int128)4e18) return (long long)4e18;
  }
  return (long long)r;
}

long long tree_count_below(const SubcubeTree& t, int node) {
  const SubcubeNode& nd = t.nodes[(size_t)node];
  if (nd.children.empty()) return 1;
  long long child = tree_count_below(t, nd.children[0]);  // all children identical in shape
  long long prod = saturating_pow(child, (int)nd.children.size());
  return prod >= (long long)4e18 ? prod : 1 + prod;
}

void enumerate_below(const SubcubeTree& t, int node,
                     std::vector<std::vector<int>>& out) {
  out.clear();
  out.push_back({node});  // the node kept as a leaf
  const SubcubeNode& nd = t.nodes[(size_t)node];
  if (nd.children.empty()) return;
  std::vector<std::vector<std::vector<int>>> per_child;
  for (int c : nd.children) {
    per_child.emplace_back();
    enumerate_below(t, c, per_child.back());
  }
  // cartesian product over children choices
  std::vector<std::vector<int>> acc = {{}};
  for (const auto& choices : per_child) {
    std::vector<std::vector<int>> next;
    for (const auto& partial : acc) {
      for (const auto& ch : choices) {
        std::vector<int> merged = partial;
        merged.insert(merged.end(), ch.begin(), ch.end());
        next.push_back(std::move(merged));
      }
    }
    acc = std::move(next);
  }
  for (auto& v : acc) out.push_back(std::move(v));
}

}  // namespace

long long SubcubeTree::admissible_tree_count() const { return tree_count_below(*this, 0); }

std::vector<std::vector<int>> SubcubeTree::enumerate_leaf_sets(long long cap) const {
  if (admissible_tree_count() > cap)
    throw std::runtime_error("enumerate_leaf_sets: admissible tree count exceeds cap");
  std::vector<std::vector<int>> out;
  enumerate_below(*this, 0, out);
  return out;
}

void write_points(std::ostream& os, const std::vector<Point>& pts) {
  for (const Point& p : pts) {
    for (size_t k = 0; k < p.size(); ++k) os << (k ? " " : "") << p[k];
    os << '\n';
  }
}

std::vector<Point> read_points(std::istream& is, int dim) {
  std::vector<Point> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Point p;
    int v;
    while (ls >> v) p.push_back(v);
    if ((int)p.size() != dim) throw std::runtime_error("read_points: wrong coordinate count");
    pts.push_back(p);
  }
  return pts;
}

}  // namespace errw

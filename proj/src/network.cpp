#include "errw/network.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "errw/report.hpp"
#include "errw/rng.hpp"

namespace errw {

void ConductanceNetwork::validate() const {
  if (c.size() != g.edges.size())
    throw std::invalid_argument("network: conductance count does not match edge count");
  for (size_t e = 0; e < c.size(); ++e)
    if (!(c[e] > 0) || !std::isfinite(c[e]))
      throw std::invalid_argument("network: conductance on edge " + std::to_string(e) +
                                  " must be positive and finite");
  if (root < 0 || root >= g.n) throw std::invalid_argument("network: root out of range");
  if (!g.connected()) throw std::invalid_argument("network: graph must be connected");
}

std::vector<double> ConductanceNetwork::vertex_strength() const {
  std::vector<double> s((size_t)g.n, 0.0);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    s[(size_t)i] += c[e];
    s[(size_t)j] += c[e];
  }
  return s;
}

Eigen::MatrixXd laplacian(const ConductanceNetwork& net) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(net.g.n, net.g.n);
  for (size_t e = 0; e < net.g.edges.size(); ++e) {
    auto [i, j] = net.g.edges[e];
    m(i, i) += net.c[e];
    m(j, j) += net.c[e];
    m(i, j) -= net.c[e];
    m(j, i) -= net.c[e];
  }
  return m;
}

namespace {

Eigen::MatrixXd reduced_laplacian(const ConductanceNetwork& net) {
  Eigen::MatrixXd full = laplacian(net);
  int n = net.g.n;
  Eigen::MatrixXd red(n - 1, n - 1);
  for (int i = 0, ri = 0; i < n; ++i) {
    if (i == net.root) continue;
    for (int j = 0, rj = 0; j < n; ++j) {
      if (j == net.root) continue;
      red(ri, rj) = full(i, j);
      ++rj;
    }
    ++ri;
  }
  return red;
}

// solve red * x = rhs with iterative refinement down to a 1e-10 residual
Eigen::MatrixXd refined_solve(const Eigen::MatrixXd& red, const Eigen::MatrixXd& rhs,
                              const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(red);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(who) + ": reduced Laplacian is not positive definite");
  Eigen::MatrixXd x = llt.solve(rhs);
  for (int pass = 0; pass < 8; ++pass) {
    Eigen::MatrixXd resid = rhs - red * x;
    double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
    if (resid.cwiseAbs().maxCoeff() <= 1e-10 * scale) return x;
    x += llt.solve(resid);
  }
  return x;
}

int reduced_row(int v, int root) { return v == root ? -1 : (v < root ? v : v - 1); }

}  // namespace

Eigen::MatrixXd greens_matrix(const ConductanceNetwork& net) {
  net.validate();
  int n = net.g.n;
  if (n == 1) return Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd red = reduced_laplacian(net);
  Eigen::MatrixXd inv =
      refined_solve(red, Eigen::MatrixXd::Identity(n - 1, n - 1), "greens_matrix");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int ri = reduced_row(i, net.root);
    if (ri < 0) continue;
    for (int j = 0; j < n; ++j) {
      int rj = reduced_row(j, net.root);
      if (rj >= 0) g(i, j) = inv(ri, rj);
    }
  }
  return g;
}

double effective_resistance(const ConductanceNetwork& net, int x, int y) {
  net.validate();
  if (x < 0 || y < 0 || x >= net.g.n || y >= net.g.n)
    throw std::invalid_argument("effective_resistance: vertex out of range");
  if (x == y) return 0.0;
  Eigen::MatrixXd red = reduced_laplacian(net);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(net.g.n - 1);
  int rx = reduced_row(x, net.root), ry = reduced_row(y, net.root);
  if (rx >= 0) rhs(rx) += 1.0;
  if (ry >= 0) rhs(ry) -= 1.0;
  Eigen::MatrixXd sol = refined_solve(red, rhs, "effective_resistance");
  return (rhs.transpose() * sol)(0, 0);
}

ConductanceNetwork contract(const ConductanceNetwork& net, const std::vector<int>& glue,
                            int* glued_id) {
  if (glue.empty()) throw std::invalid_argument("contract: empty glue set");
  std::vector<char> in_glue((size_t)net.g.n, 0);
  for (int v : glue) {
    if (v < 0 || v >= net.g.n) throw std::invalid_argument("contract: vertex out of range");
    in_glue[(size_t)v] = 1;
  }
  std::vector<int> remap((size_t)net.g.n, -1);
  int next = 0;
  for (int v = 0; v < net.g.n; ++v)
    if (!in_glue[(size_t)v]) remap[(size_t)v] = next++;
  int merged = next;
  for (int v = 0; v < net.g.n; ++v)
    if (in_glue[(size_t)v]) remap[(size_t)v] = merged;

  std::map<std::pair<int, int>, double> acc;
  for (size_t e = 0; e < net.g.edges.size(); ++e) {
    auto [i, j] = net.g.edges[e];
    int a = remap[(size_t)i], b = remap[(size_t)j];
    if (a == b) continue;
    acc[{std::min(a, b), std::max(a, b)}] += net.c[e];
  }
  ConductanceNetwork out;
  out.g.n = merged + 1;
  for (const auto& [key, cond] : acc) {
    out.g.edges.push_back(key);
    out.c.push_back(cond);
  }
  out.g.finalize();
  out.root = remap[(size_t)net.root];
  if (glued_id) *glued_id = merged;
  return out;
}

double effective_resistance_to_set(const ConductanceNetwork& net, int x,
                                   const std::vector<int>& targets) {
  std::set<int> tset(targets.begin(), targets.end());
  if (tset.count(x))
    throw std::invalid_argument("effective_resistance_to_set: source inside target set");
  int merged = 0;
  ConductanceNetwork glued = contract(net, targets, &merged);
  int gx = x - (int)std::count_if(tset.begin(), tset.end(), [x](int t) { return t < x; });
  return effective_resistance(glued, gx, merged);
}

double hitting_probability(const ConductanceNetwork& net, int x,
                           const std::vector<int>& targets) {
  if (x < 0 || x >= net.g.n)
    throw std::invalid_argument("hitting_probability: vertex out of range");
  double strength = net.vertex_strength()[(size_t)x];
  double r = effective_resistance_to_set(net, x, targets);
  return 1.0 / (strength * r);
}

std::vector<double> xy_conductances(const Graph& g, const EdgeWeights& a,
                                    const FieldConfig& f, int x, int y) {
  f.validate(g.n);
  if (x < 0 || y < 0 || x >= g.n || y >= g.n || x == y)
    throw std::invalid_argument("xy_conductances: bad vertex pair");
  double bxy = b_quantity(f, x, y);
  double shift = -f.u[(size_t)x] - f.u[(size_t)y];
  std::vector<double> c(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    c[e] = a[(int)e] * std::exp(f.u[(size_t)i] + f.u[(size_t)j] + shift) * bxy /
           b_quantity(f, i, j);
  }
  return c;
}

double neumann_resistance(const Diamond& d, const std::vector<double>& c_on_diamond_edges) {
  ConductanceNetwork net{d.graph(), c_on_diamond_edges, 0};
  return effective_resistance(net, d.x_index(), d.y_index());
}

std::vector<double> divergence(const Graph& g, const UnitFlow& f) {
  if (f.theta.size() != g.edges.size())
    throw std::invalid_argument("divergence: flow size does not match edge count");
  std::vector<double> div((size_t)g.n, 0.0);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    div[(size_t)i] += f.theta[e];
    div[(size_t)j] -= f.theta[e];
  }
  return div;
}

UnitFlow min_energy_flow(const ConductanceNetwork& net, int x, int y) {
  net.validate();
  if (x == y) throw std::invalid_argument("min_energy_flow: endpoints coincide");
  Eigen::MatrixXd red = reduced_laplacian(net);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(net.g.n - 1);
  int rx = reduced_row(x, net.root), ry = reduced_row(y, net.root);
  if (rx >= 0) rhs(rx) += 1.0;
  if (ry >= 0) rhs(ry) -= 1.0;
  Eigen::MatrixXd sol = refined_solve(red, rhs, "min_energy_flow");
  std::vector<double> phi((size_t)net.g.n, 0.0);
  for (int v = 0; v < net.g.n; ++v) {
    int rv = reduced_row(v, net.root);
    if (rv >= 0) phi[(size_t)v] = sol(rv, 0);
  }
  UnitFlow f;
  f.x = x;
  f.y = y;
  f.theta.resize(net.g.edges.size());
  for (size_t e = 0; e < net.g.edges.size(); ++e) {
    auto [i, j] = net.g.edges[e];
    f.theta[e] = net.c[e] * (phi[(size_t)i] - phi[(size_t)j]);
  }
  return f;
}

double flow_energy(const ConductanceNetwork& net, const UnitFlow& f) {
  if (f.theta.size() != net.c.size())
    throw std::invalid_argument("flow_energy: flow size does not match edge count");
  double en = 0;
  for (size_t e = 0; e < f.theta.size(); ++e) en += f.theta[e] * f.theta[e] / net.c[e];
  return en;
}

void ChiParams::validate(bool for_resistance_bound) const {
  if (!(b > 0) || !std::isfinite(b))
    throw std::invalid_argument("chi: threshold b must be positive");
  if (!(alpha >= 0) || alpha > 1.0)
    throw std::invalid_argument("chi: exponent alpha must lie in [0, 1]");
  if (for_resistance_bound && alpha > 0.125 + 1e-12)
    throw std::invalid_argument(
        "chi: the resistance bound needs alpha <= 1/8, got alpha = " + std::to_string(alpha));
}

bool chi_indicator(const FieldConfig& f, const Point& px, const Point& py, int ix, int iy,
                   const ChiParams& cp) {
  if (ix == iy) return true;  // coincident factor defined true
  double dist = l2_dist(px, py);
  return b_quantity(f, ix, iy) <= cp.b * std::pow(dist, cp.alpha);
}

bool chi_bar(const Diamond& d, const DiamondSplit& split, const FieldConfig& f,
             const ChiParams& cp) {
  int ix = d.x_index(), iy = d.y_index();
  for (int i : split.x_side)
    if (!chi_indicator(f, d.x, d.members[(size_t)i], ix, i, cp)) return false;
  for (int i : split.y_side)
    if (!chi_indicator(f, d.y, d.members[(size_t)i], iy, i, cp)) return false;
  return true;
}

namespace {

std::vector<double> to_real(const Point& p) { return std::vector<double>(p.begin(), p.end()); }

double point_segment_distance(const std::vector<double>& p, const std::vector<double>& a,
                              const std::vector<double>& b) {
  double num = 0, den = 0;
  for (size_t k = 0; k < p.size(); ++k) {
    num += (p[k] - a[k]) * (b[k] - a[k]);
    den += (b[k] - a[k]) * (b[k] - a[k]);
  }
  double t = den > 0 ? std::min(1.0, std::max(0.0, num / den)) : 0.0;
  double d2 = 0;
  for (size_t k = 0; k < p.size(); ++k) {
    double diff = p[k] - (a[k] + t * (b[k] - a[k]));
    d2 += diff * diff;
  }
  return std::sqrt(d2);
}

double polyline_distance(const Point& v, const std::vector<std::vector<double>>& poly) {
  std::vector<double> p = to_real(v);
  double best = std::numeric_limits<double>::infinity();
  for (size_t s = 0; s + 1 < poly.size(); ++s)
    best = std::min(best, point_segment_distance(p, poly[s], poly[s + 1]));
  return best;
}

// loop erasure keeping first occurrences; input steps are lattice-adjacent
std::vector<Point> loop_erase(const std::vector<Point>& walk) {
  std::vector<Point> path;
  for (const Point& p : walk) {
    auto it = std::find(path.begin(), path.end(), p);
    if (it != path.end())
      path.erase(it + 1, path.end());
    else
      path.push_back(p);
  }
  return path;
}

// cheapest member path under per-vertex entry costs; ties resolved by vertex id
std::vector<int> dijkstra_path(const Graph& g, const std::vector<long long>& vcost, int from,
                               int to) {
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> dist((size_t)g.n, inf);
  std::vector<int> parent((size_t)g.n, -1);
  using Item = std::pair<long long, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  dist[(size_t)from] = 0;
  pq.push({0, from});
  while (!pq.empty()) {
    auto [dcur, v] = pq.top();
    pq.pop();
    if (dcur != dist[(size_t)v]) continue;
    if (v == to) break;
    for (auto [nb, e] : g.adj[(size_t)v]) {
      (void)e;
      long long cand = dcur + vcost[(size_t)nb];
      if (cand < dist[(size_t)nb]) {
        dist[(size_t)nb] = cand;
        parent[(size_t)nb] = v;
        pq.push({cand, nb});
      }
    }
  }
  if (dist[(size_t)to] >= inf)
    throw std::runtime_error("spread_flow: diamond graph has no path between apexes");
  std::vector<int> path;
  for (int v = to; v != -1; v = parent[(size_t)v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

SpreadFlowResult spread_flow(const Diamond& d, double fx, double fy, int paths,
                             uint64_t seed) {
  if (paths < 1) throw std::invalid_argument("spread_flow: need at least one path");
  int dim = d.dim();
  Graph g = d.graph();
  int xi = d.x_index(), yi = d.y_index();
  double len = l2_dist(d.x, d.y);

  bool exact = d.kind == DiamondKind::Exact;
  double cos_half = exact ? cos_quarter_pi() : cos_pi_over_16();
  double tan_half = std::sqrt(1.0 / (cos_half * cos_half) - 1.0);
  Cone cone_x = make_cone(d.x, d.axis, cos_half);
  std::vector<double> back(d.axis.size());
  for (int k = 0; k < dim; ++k) back[(size_t)k] = (double)d.x[(size_t)k] - d.y[(size_t)k];
  Cone cone_y = make_cone(d.y, back, cos_half);

  // cross-section height along the segment: feasible grid value closest to
  // the middle keeps the section wide and inside both covering balls; the
  // midpoint is the fallback when the grid is empty
  double cos_ball = exact ? cos_quarter_pi() : cos_pi_over_8();
  double lo = 1.0 - fy * cos_ball, hi = fx * cos_ball;
  double h = 0.5, best_gap = std::numeric_limits<double>::infinity();
  for (int k = 10; k <= 90; ++k) {
    double cand = 0.01 * k;
    if (cand >= lo - 1e-12 && cand <= hi + 1e-12 && std::abs(cand - 0.5) < best_gap - 1e-15) {
      best_gap = std::abs(cand - 0.5);
      h = cand;
    }
  }

  // orthonormal basis of the hyperplane perpendicular to the segment
  std::vector<double> axis(d.axis.size());
  for (int k = 0; k < dim; ++k) axis[(size_t)k] = ((double)d.y[(size_t)k] - d.x[(size_t)k]) / len;
  std::vector<std::vector<double>> basis;
  for (int k = 0; k < dim && (int)basis.size() < dim - 1; ++k) {
    std::vector<double> v((size_t)dim, 0.0);
    v[(size_t)k] = 1.0;
    double dot = axis[(size_t)k];
    for (int t = 0; t < dim; ++t) v[(size_t)t] -= dot * axis[(size_t)t];
    for (const auto& b : basis) {
      double dd = 0;
      for (int t = 0; t < dim; ++t) dd += v[(size_t)t] * b[(size_t)t];
      for (int t = 0; t < dim; ++t) v[(size_t)t] -= dd * b[(size_t)t];
    }
    double norm = 0;
    for (int t = 0; t < dim; ++t) norm += v[(size_t)t] * v[(size_t)t];
    if (norm < 1e-12) continue;
    norm = std::sqrt(norm);
    for (int t = 0; t < dim; ++t) v[(size_t)t] /= norm;
    basis.push_back(v);
  }

  double radius = len * std::min(h, 1.0 - h) * tan_half * 1.01;
  std::vector<double> center((size_t)dim);
  for (int k = 0; k < dim; ++k)
    center[(size_t)k] = d.x[(size_t)k] + h * ((double)d.y[(size_t)k] - d.x[(size_t)k]);

  // quasi-uniform sequence over the section disk, offset by the seed
  Rng offs(seed, 0xC5);
  std::vector<double> irr, off;
  double primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (int k = 0; k < dim - 1; ++k) {
    irr.push_back(std::sqrt(primes[k % 12]) + (k / 12));
    off.push_back(offs.uniform());
  }
  auto frac = [](double v) { return v - std::floor(v); };

  SpreadFlowResult res;
  res.paths = paths;
  res.h = h;
  res.counts.assign(g.edges.size(), 0);
  res.flow.x = xi;
  res.flow.y = yi;

  long long m = 0;
  const long long m_cap = (long long)paths * 2000 + 1000;
  for (int t = 0; t < paths; ++t) {
    std::vector<double> u = center;
    bool found = false;
    while (m < m_cap) {
      ++m;
      std::vector<double> xi_vec((size_t)dim - 1);
      double norm2 = 0;
      for (int k = 0; k + 1 < dim; ++k) {
        xi_vec[(size_t)k] = 2.0 * frac((double)m * irr[(size_t)k] + off[(size_t)k]) - 1.0;
        norm2 += xi_vec[(size_t)k] * xi_vec[(size_t)k];
      }
      if (norm2 > 1.0) continue;
      std::vector<double> cand = center;
      for (int k = 0; k + 1 < dim; ++k)
        for (int t2 = 0; t2 < dim; ++t2)
          cand[(size_t)t2] += radius * xi_vec[(size_t)k] * basis[(size_t)k][(size_t)t2];
      if (!cone_contains_real(cone_x, cand) || !cone_contains_real(cone_y, cand)) continue;
      Point rounded((size_t)dim);
      for (int k = 0; k < dim; ++k) rounded[(size_t)k] = (int)std::llround(cand[(size_t)k]);
      if (!d.is_member(rounded)) continue;
      u = cand;
      found = true;
      break;
    }

    Point ur((size_t)dim);
    for (int k = 0; k < dim; ++k) ur[(size_t)k] = (int)std::llround(u[(size_t)k]);
    std::vector<std::vector<double>> poly = {to_real(d.x), u, to_real(d.y)};

    std::vector<Point> walk;
    bool in_members = found && d.is_member(ur);
    if (in_members) {
      walk = rasterize_segment(d.x, ur);
      std::vector<Point> second = rasterize_segment(ur, d.y);
      walk.insert(walk.end(), second.begin() + 1, second.end());
      walk = loop_erase(walk);
      for (const Point& p : walk)
        if (!d.is_member(p)) {
          in_members = false;
          break;
        }
    }

    std::vector<int> vpath;
    if (in_members) {
      for (const Point& p : walk) vpath.push_back(d.index_of(p));
    } else {
      // staircase left the member set (thin cones near lattice scale):
      // search inside the diamond, biased toward the intended polyline
      std::vector<long long> vcost(d.members.size());
      for (size_t v = 0; v < d.members.size(); ++v) {
        double dd = polyline_distance(d.members[v], poly);
        vcost[v] = 1000000 + std::min((long long)999999, (long long)std::llround(1000.0 * dd));
      }
      vpath = dijkstra_path(g, vcost, xi, yi);
      res.staircase_fallbacks++;
    }

    for (int v : vpath)
      res.max_tracking_dist =
          std::max(res.max_tracking_dist, polyline_distance(d.members[(size_t)v], poly));
    for (size_t s = 0; s + 1 < vpath.size(); ++s) {
      int a = vpath[s], b2 = vpath[s + 1];
      int e = g.edge_between(a, b2);
      if (e < 0) throw std::runtime_error("spread_flow: path step between non-adjacent members");
      if (g.edges[(size_t)e].first == a)
        res.counts[(size_t)e] += 1;
      else
        res.counts[(size_t)e] -= 1;
    }
  }

  res.flow.theta.resize(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e)
    res.flow.theta[e] = (double)res.counts[e] / (double)paths;
  return res;
}

ResistanceBoundReport resistance_bound_check(const Diamond& d, double fx, double fy,
                                             double a_uniform, const FieldConfig& f,
                                             const ChiParams& cp, int paths, uint64_t seed) {
  cp.validate(true);
  if (!(a_uniform > 0)) throw std::invalid_argument("resistance_bound_check: a must be positive");
  Graph g = d.graph();
  f.validate(g.n);
  DiamondSplit split = split_diamond(d, fx, fy);

  ResistanceBoundReport rep;
  rep.chi_bar_holds = chi_bar(d, split, f, cp);

  EdgeWeights a = EdgeWeights::uniform(g, a_uniform);
  std::vector<double> cxy = xy_conductances(g, a, f, d.x_index(), d.y_index());
  rep.a_times_neumann = a_uniform * neumann_resistance(d, cxy);

  SpreadFlowResult sf = spread_flow(d, fx, fy, paths, seed);
  std::vector<double> gamma(cxy.size());
  for (size_t e = 0; e < cxy.size(); ++e) gamma[e] = cxy[e] / a_uniform;
  ConductanceNetwork gamma_net{g, gamma, 0};
  rep.spread_energy = flow_energy(gamma_net, sf.flow);
  rep.h = sf.h;
  rep.paths = sf.paths;
  rep.max_tracking_dist = sf.max_tracking_dist;
  rep.staircase_fallbacks = sf.staircase_fallbacks;
  return rep;
}

void write_network_csv(std::ostream& os, const ConductanceNetwork& net) {
  os << "i,j,conductance\n";
  for (size_t e = 0; e < net.g.edges.size(); ++e)
    os << net.g.edges[e].first << ',' << net.g.edges[e].second << ',' << fmt_double(net.c[e])
       << '\n';
}

ConductanceNetwork read_network_csv(std::istream& is, int root) {
  std::string line;
  if (!std::getline(is, line) || line != "i,j,conductance")
    throw std::runtime_error("read_network_csv: missing header");
  ConductanceNetwork net;
  net.root = root;
  int maxv = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int i, j;
    double c;
    char c1, c2;
    if (!(ls >> i >> c1 >> j >> c2 >> c) || c1 != ',' || c2 != ',')
      throw std::runtime_error("read_network_csv: bad row: " + line);
    net.g.edges.push_back({i, j});
    net.c.push_back(c);
    maxv = std::max(maxv, std::max(i, j));
  }
  net.g.n = maxv + 1;
  net.g.finalize();
  net.validate();
  return net;
}

void write_flow_csv(std::ostream& os, const Graph& g, const UnitFlow& f) {
  os << "i,j,theta\n";
  for (size_t e = 0; e < g.edges.size(); ++e)
    os << g.edges[e].first << ',' << g.edges[e].second << ',' << fmt_double(f.theta[e]) << '\n';
}

}  // namespace errw

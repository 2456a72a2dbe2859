#include "errw/ward.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

#include "errw/parallel.hpp"

namespace errw {

WardReport make_report(const std::string& name, const McEstimate& e, double target,
                       bool is_bound) {
  WardReport r;
  r.name = name;
  r.estimate = e.mean;
  r.se = e.se;
  r.target = target;
  r.is_bound = is_bound;
  r.z = is_bound ? z_upper(e, target) : z_score(e, target);
  r.verdict = verdict_for(r.z);
  r.samples = e.samples;
  r.ess = e.ess;
  return r;
}

namespace {

FieldConfig config_of(const FieldSample& s, int root) {
  FieldConfig f;
  f.root = root;
  f.u = s.u;
  f.s = s.s;
  return f;
}

// evaluate a per-sample functional over a run, preserving sample order
std::vector<double> map_samples(const FieldRun& run, ExecMode mode,
                                const std::function<double(const FieldConfig&)>& fn,
                                int root) {
  std::vector<const FieldSample*> all = run.all();
  std::vector<double> out(all.size());
  run_indexed((int)all.size(), mode, [&](int i) {
    out[(size_t)i] = fn(config_of(*all[(size_t)i], root));
  });
  return out;
}

std::vector<int> hop_distances(const Graph& g, int from) {
  std::vector<int> dist((size_t)g.n, -1);
  std::queue<int> q;
  dist[(size_t)from] = 0;
  q.push(from);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (auto [nb, e] : g.adj[(size_t)v]) {
      (void)e;
      if (dist[(size_t)nb] < 0) {
        dist[(size_t)nb] = dist[(size_t)v] + 1;
        q.push(nb);
      }
    }
  }
  return dist;
}

}  // namespace

WardReport ward_identity_estimate(const Graph& g, const EdgeWeights& a, int root, int x,
                                  int y, double m, const McmcParams& p,
                                  const FieldRun* reuse) {
  if (x == y || x < 0 || y < 0 || x >= g.n || y >= g.n)
    throw std::invalid_argument("ward_identity_estimate: bad vertex pair");
  if (!(m > 0) || m > a.min_weight() / 4.0 + 1e-12)
    throw std::invalid_argument(
        "ward_identity_estimate: exponent must satisfy 0 < m <= min(a)/4");
  FieldRun local;
  const FieldRun* run = reuse;
  if (!run) {
    local = sample_field_mcmc(g, a, root, p);
    run = &local;
  }
  std::vector<double> vals = map_samples(*run, p.mode, [&](const FieldConfig& f) {
    double b = b_quantity(f, x, y);
    ConductanceNetwork net{g, xy_conductances(g, a, f, x, y), root};
    double d = effective_resistance(net, x, y);
    return std::pow(b, m) * (1.0 - m * d);
  }, root);
  return make_report("ward[" + std::to_string(x) + "-" + std::to_string(y) + "]",
                     batch_means(vals), 1.0, false);
}

WardReport single_edge_b_moment(const EdgeWeights& a, double m, const McmcParams& p) {
  if (a.size() != 1) throw std::invalid_argument("single_edge_b_moment: needs one edge");
  if (!(m > 0) || !(m < a[0]))
    throw std::invalid_argument("single_edge_b_moment: exponent must satisfy 0 < m < a");
  Graph g = Graph::single_edge();
  FieldRun run = sample_field_mcmc(g, a, 0, p);
  std::vector<double> vals = map_samples(run, p.mode, [&](const FieldConfig& f) {
    return std::pow(b_quantity(f, 0, 1), m);
  }, 0);
  double target = 1.0 / (1.0 - m / a[0]);
  return make_report("b-moment", batch_means(vals), target, false);
}

namespace {

// region bookkeeping shared by the protected estimates
struct RegionData {
  Graph sub;                      // free-boundary subgraph on the region
  std::vector<int> edge_orig;     // subgraph edge -> original edge id
  std::vector<int> verts;         // original ids, position = subgraph id
  int lx = 0, ly = 0;             // apexes in subgraph ids
  std::vector<int> x_side, y_side;  // original ids gated at each apex
};

RegionData build_region(const Graph& g, const WardRegion& r) {
  std::set<int> vs(r.vertices.begin(), r.vertices.end());
  if (vs.size() != r.vertices.size())
    throw std::invalid_argument("protected regions: duplicate vertex in region");
  if (!vs.count(r.x) || !vs.count(r.y) || r.x == r.y)
    throw std::invalid_argument("protected regions: apexes must be distinct region members");
  RegionData rd;
  rd.verts.assign(vs.begin(), vs.end());
  std::vector<int> local((size_t)g.n, -1);
  for (size_t i = 0; i < rd.verts.size(); ++i) {
    if (rd.verts[i] < 0 || rd.verts[i] >= g.n)
      throw std::invalid_argument("protected regions: vertex out of range");
    local[(size_t)rd.verts[i]] = (int)i;
  }
  rd.sub.n = (int)rd.verts.size();
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    if (local[(size_t)i] >= 0 && local[(size_t)j] >= 0) {
      rd.sub.edges.push_back({local[(size_t)i], local[(size_t)j]});
      rd.edge_orig.push_back((int)e);
    }
  }
  rd.sub.finalize();
  if (!rd.sub.connected())
    throw std::invalid_argument("protected regions: region subgraph must be connected");
  rd.lx = local[(size_t)r.x];
  rd.ly = local[(size_t)r.y];

  // split by hop-distance balls of radius (3/5) dist(x,y): the widest legal
  // balanced split, and single-edge regions get only the coincident factors
  std::vector<int> dx = hop_distances(g, r.x), dy = hop_distances(g, r.y);
  double len = (double)dx[(size_t)r.y];
  for (int v : rd.verts) {
    bool in_x = dx[(size_t)v] <= 0.6 * len + 1e-9;
    bool in_y = dy[(size_t)v] <= 0.6 * len + 1e-9;
    if (!in_x && !in_y)
      throw std::invalid_argument(
          "protected regions: vertex " + std::to_string(v) + " outside both apex balls");
    if (in_x) rd.x_side.push_back(v);
    if (in_y) rd.y_side.push_back(v);
  }
  return rd;
}

bool region_gate(const FieldConfig& f, const Graph& g, const RegionData& rd, int x, int y,
                 const ChiParams& cp, const std::vector<int>& dx,
                 const std::vector<int>& dy) {
  for (int v : rd.x_side) {
    if (v == x) continue;
    if (b_quantity(f, x, v) > cp.b * std::pow((double)dx[(size_t)v], cp.alpha)) return false;
  }
  for (int v : rd.y_side) {
    if (v == y) continue;
    if (b_quantity(f, y, v) > cp.b * std::pow((double)dy[(size_t)v], cp.alpha)) return false;
  }
  (void)g;
  return true;
}

}  // namespace

ProtectedReports protected_ward_estimate(const Graph& g, const EdgeWeights& a, int root,
                                         const std::vector<WardRegion>& regions,
                                         const std::vector<double>& m, const ChiParams& cp,
                                         const McmcParams& p) {
  if (regions.empty() || m.size() != regions.size())
    throw std::invalid_argument("protected_ward_estimate: one exponent per region required");
  cp.validate(false);
  std::set<int> seen;
  for (const auto& r : regions)
    for (int v : r.vertices)
      if (!seen.insert(v).second)
        throw std::invalid_argument(
            "protected_ward_estimate: regions must be pairwise vertex-disjoint");
  for (double mj : m)
    if (!(mj > 0) || mj > a.min_weight() / 4.0 + 1e-12)
      throw std::invalid_argument(
          "protected_ward_estimate: exponents must satisfy 0 < m <= min(a)/4");

  std::vector<RegionData> rds;
  std::vector<std::vector<int>> dxs, dys;
  for (const auto& r : regions) {
    rds.push_back(build_region(g, r));
    dxs.push_back(hop_distances(g, r.x));
    dys.push_back(hop_distances(g, r.y));
  }

  FieldRun run = sample_field_mcmc(g, a, root, p);
  std::vector<const FieldSample*> all = run.all();
  size_t n = all.size();
  std::vector<double> plain(n), gated(n), moments(n), cemp(n, 0.0);

  run_indexed((int)n, p.mode, [&](int idx) {
    FieldConfig f = config_of(*all[(size_t)idx], root);
    double prod_plain = 1.0, prod_b = 1.0;
    bool gates = true;
    double worst = 0.0;
    for (size_t j = 0; j < regions.size(); ++j) {
      const RegionData& rd = rds[j];
      double b = b_quantity(f, regions[j].x, regions[j].y);
      std::vector<double> csub(rd.edge_orig.size());
      double shift = -f.u[(size_t)regions[j].x] - f.u[(size_t)regions[j].y];
      for (size_t e = 0; e < rd.edge_orig.size(); ++e) {
        auto [gi, gj] = g.edges[(size_t)rd.edge_orig[e]];
        csub[e] = a[rd.edge_orig[e]] * std::exp(f.u[(size_t)gi] + f.u[(size_t)gj] + shift) *
                  b / b_quantity(f, gi, gj);
      }
      ConductanceNetwork net{rd.sub, csub, 0};
      double dn = effective_resistance(net, rd.lx, rd.ly);
      double bm = std::pow(b, m[j]);
      prod_plain *= bm * (1.0 - m[j] * dn);
      prod_b *= bm;
      if (!region_gate(f, g, rd, regions[j].x, regions[j].y, cp, dxs[j], dys[j]))
        gates = false;
      worst = std::max(worst, a.min_weight() * dn);
    }
    plain[(size_t)idx] = prod_plain;
    gated[(size_t)idx] = gates ? prod_plain : 0.0;
    moments[(size_t)idx] = gates ? prod_b : 0.0;
    cemp[(size_t)idx] = gates ? worst : 0.0;
  });

  ProtectedReports out;
  out.plain = make_report("protected-plain", batch_means(plain), 1.0, true);
  out.gated = make_report("protected-gated", batch_means(gated), 1.0, true);
  for (double v : cemp) out.c_empirical = std::max(out.c_empirical, v);
  double target = 1.0;
  for (size_t j = 0; j < m.size(); ++j) {
    double factor = 1.0 - m[j] * out.c_empirical / a.min_weight();
    if (!(factor > 0)) {
      target = std::numeric_limits<double>::infinity();
      break;
    }
    target /= factor;
  }
  out.moments = make_report("protected-moments", batch_means(moments), target, true);
  return out;
}

WardReport moment_bound_estimate(const Graph& g, const EdgeWeights& a, int root,
                                 const std::vector<int>& edge_ids,
                                 const std::vector<double>& m, const McmcParams& p) {
  if (edge_ids.empty() || m.size() != edge_ids.size())
    throw std::invalid_argument("moment_bound_estimate: one exponent per edge required");
  for (int e : edge_ids)
    if (e < 0 || e >= (int)g.edges.size())
      throw std::invalid_argument("moment_bound_estimate: edge id out of range");
  for (double mj : m)
    if (!(mj > 0) || mj > a.min_weight() / 2.0 + 1e-12)
      throw std::invalid_argument(
          "moment_bound_estimate: exponents must satisfy 0 < m <= min(a)/2");
  FieldRun run = sample_field_mcmc(g, a, root, p);
  std::vector<double> vals = map_samples(run, p.mode, [&](const FieldConfig& f) {
    double prod = 1.0;
    for (size_t j = 0; j < edge_ids.size(); ++j) {
      auto [i, k] = g.edges[(size_t)edge_ids[j]];
      prod *= std::pow(b_quantity(f, i, k), m[j]);
    }
    return prod;
  }, root);
  double target = std::pow(2.0, (double)edge_ids.size());
  return make_report("moment-bound", batch_means(vals), target, true);
}

std::vector<WardReport> fluctuation_estimate(const Graph& g, const EdgeWeights& a, int root,
                                             const std::vector<std::pair<int, int>>& pairs,
                                             double m, const McmcParams& p,
                                             const FieldRun* reuse) {
  if (pairs.empty()) throw std::invalid_argument("fluctuation_estimate: no pairs given");
  if (!(m > 0) || m > a.min_weight() / 4.0 + 1e-12)
    throw std::invalid_argument(
        "fluctuation_estimate: exponent must satisfy 0 < m <= min(a)/4");
  FieldRun local;
  const FieldRun* run = reuse;
  if (!run) {
    local = sample_field_mcmc(g, a, root, p);
    run = &local;
  }
  std::vector<const FieldSample*> all = run->all();
  std::vector<WardReport> reports(pairs.size());
  run_indexed((int)pairs.size(), p.mode, [&](int pi) {
    auto [x, y] = pairs[(size_t)pi];
    if (x == y || x < 0 || y < 0 || x >= g.n || y >= g.n)
      throw std::invalid_argument("fluctuation_estimate: bad vertex pair");
    std::vector<double> vals(all.size());
    for (size_t i = 0; i < all.size(); ++i)
      vals[i] = std::pow(std::cosh(all[i]->u[(size_t)x] - all[i]->u[(size_t)y]), m);
    reports[(size_t)pi] = make_report(
        "fluct[" + std::to_string(x) + "-" + std::to_string(y) + "]", batch_means(vals),
        2.0, true);
  });
  return reports;
}

bool is_n_good(const LatticeBox& box, const FieldConfig& f, const Point& x, int n,
               const ChiParams& cp) {
  if (!box.contains(x)) throw std::invalid_argument("is_n_good: point outside box");
  f.validate((int)box.vertex_count());
  double reach = std::pow(4.0, n);
  int ix = box.index_of(x);
  for (int i = 0; i < (int)box.vertex_count(); ++i) {
    if (i == ix) continue;
    double dist = l2_dist(box.point_of(i), x);
    if (dist < 1.0 - 1e-12 || dist > reach + 1e-12) continue;
    if (b_quantity(f, ix, i) > cp.b * std::pow(dist, cp.alpha)) return false;
  }
  return true;
}

namespace {

// dominated bad-pair sum of a subcube at depth k: pairs (x in the cube,
// y in the box) with 4^{n-k-1} < |x-y| <= 4^{n-k}, upper end inclusive
double band_sum(const LatticeBox& box, const FieldConfig& f, const ChiParams& cp,
                const SubcubeTree& tree, int node, double m_exp,
                const std::vector<Point>& box_pts) {
  const SubcubeNode& nd = tree.nodes[(size_t)node];
  double hi = std::pow(4.0, tree.scale - nd.depth);
  double lo = hi / 4.0;
  double total = 0;
  for (const Point& x : tree.cube_points(node)) {
    int ix = box.index_of(x);
    for (size_t yi = 0; yi < box_pts.size(); ++yi) {
      double dist = l2_dist(box_pts[yi], x);
      if (dist <= lo + 1e-12 || dist > hi + 1e-12) continue;
      double ratio = b_quantity(f, ix, (int)yi) / (cp.b * std::pow(dist, cp.alpha));
      total += std::pow(ratio, m_exp);
    }
  }
  return total;
}

double rhs_below(const LatticeBox& box, const FieldConfig& f, const ChiParams& cp,
                 const SubcubeTree& tree, int node, double m_exp,
                 const std::vector<Point>& box_pts) {
  double s = band_sum(box, f, cp, tree, node, m_exp, box_pts);
  const SubcubeNode& nd = tree.nodes[(size_t)node];
  if (nd.children.empty()) return s;
  double prod = 1.0;
  for (int c : nd.children) prod *= rhs_below(box, f, cp, tree, c, m_exp, box_pts);
  return s + prod;
}

}  // namespace

double good_point_rhs(const LatticeBox& box, const FieldConfig& f, const ChiParams& cp,
                      const SubcubeTree& tree, double m_exp) {
  f.validate((int)box.vertex_count());
  if (!(m_exp > 0)) throw std::invalid_argument("good_point_rhs: exponent must be positive");
  std::vector<Point> box_pts = box.all_points();
  for (const Point& p : tree.cube_points(0))
    if (!box.contains(p))
      throw std::invalid_argument("good_point_rhs: cube extends outside the box");
  return rhs_below(box, f, cp, tree, 0, m_exp, box_pts);
}

GoodPointReport good_point_check(const LatticeBox& box, const FieldConfig& f,
                                 const ChiParams& cp, int n, double m_exp,
                                 const Point& center) {
  SubcubeTree tree = subcube_tree(box.dim, n, center);
  GoodPointReport rep;
  rep.tree_count = tree.admissible_tree_count();
  rep.rhs = good_point_rhs(box, f, cp, tree, m_exp);
  rep.no_good_point = true;
  for (const Point& x : tree.cube_points(0)) {
    if (is_n_good(box, f, x, n, cp)) {
      rep.no_good_point = false;
      break;
    }
  }
  rep.holds = !rep.no_good_point || rep.rhs >= 1.0 - 1e-12;
  return rep;
}

PipelineReport transience_pipeline_check(int dim, int radius, double a_uniform,
                                         const McmcParams& p) {
  LatticeBox box(dim, radius);
  Graph g = box.graph();
  EdgeWeights a = EdgeWeights::uniform(g, a_uniform);
  int center = box.center_index();
  std::vector<int> boundary = box.boundary_indices();

  JointRun run = sample_joint_mcmc(g, a, center, p);
  std::vector<const JointSample*> all = run.all();
  std::vector<double> wr(all.size());
  run_indexed((int)all.size(), p.mode, [&](int idx) {
    const JointSample& s = *all[(size_t)idx];
    std::vector<double> c(g.edges.size());
    for (size_t e = 0; e < g.edges.size(); ++e) {
      auto [i, j] = g.edges[e];
      c[e] = s.w[e] * std::exp(s.u[(size_t)i] + s.u[(size_t)j]);
    }
    ConductanceNetwork net{g, c, center};
    double strength = net.vertex_strength()[(size_t)center];
    wr[(size_t)idx] = strength * effective_resistance_to_set(net, center, boundary);
  });

  PipelineReport rep;
  McEstimate est = batch_means(wr);
  rep.mean_w_r = est.mean;
  rep.se = est.se;
  rep.samples = est.samples;
  std::vector<double> pr(wr.size());
  for (size_t i = 0; i < wr.size(); ++i) pr[i] = 1.0 / wr[i];
  rep.mean_p = mean_of(pr);
  // empirical Jensen: 1/mean(P) <= mean(1/P) holds exactly up to rounding
  rep.jensen_ok = 1.0 / rep.mean_p <= rep.mean_w_r * (1.0 + 1e-9);

  ConductanceNetwork unit{g, std::vector<double>(g.edges.size(), 1.0), center};
  rep.unit_resistance = effective_resistance_to_set(unit, center, boundary);
  rep.ratio = rep.mean_w_r / rep.unit_resistance;
  return rep;
}

double pipeline_constant_case(int dim, int radius, double w_const) {
  if (!(w_const > 0)) throw std::invalid_argument("pipeline_constant_case: w must be positive");
  LatticeBox box(dim, radius);
  Graph g = box.graph();
  int center = box.center_index();
  ConductanceNetwork net{g, std::vector<double>(g.edges.size(), w_const), center};
  double strength = net.vertex_strength()[(size_t)center];
  return strength * effective_resistance_to_set(net, center, box.boundary_indices());
}

}  // namespace errw

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "errw/network.hpp"
#include "errw/quadrature.hpp"
#include "errw/rng.hpp"
#include "errw/ward.hpp"

using namespace errw;

namespace {

constexpr double kPi = 3.14159265358979323846;

McmcParams quick_params(uint64_t seed, int64_t burnin, int64_t retained) {
  McmcParams p;
  p.burnin_sweeps = burnin;
  p.retained_sweeps = retained;
  p.thin = 10;
  p.chains = 4;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("report wiring") {
  McEstimate e;
  e.mean = 1.05;
  e.se = 0.01;
  e.samples = 400;
  e.ess = 300;
  WardReport exact = make_report("t", e, 1.0, false);
  CHECK(exact.z == doctest::Approx(5.0));
  CHECK(exact.verdict == "suspicious");
  CHECK(!exact.is_bound);
  WardReport bound = make_report("t", e, 1.1, true);
  CHECK(bound.z == 0.0);
  CHECK(bound.verdict == "pass");
  CHECK(bound.samples == 400);
}

TEST_CASE("expected b moment by quadrature") {
  // <B> under the a=4 single edge field law, via the substitution
  // t = s exp(u/2) that makes both tails integrable
  double got = adaptive_simpson_2d(
      [](double u, double t) {
        double b = std::cosh(u) + 0.5 * t * t;
        return b * (4.0 / (2.0 * kPi)) * std::pow(b, -5.0) * std::exp(-0.5 * u);
      },
      -30.0, 30.0, -200.0, 200.0, 1e-7);
  CHECK(std::abs(got - 4.0 / 3.0) < 1e-4);
}

TEST_CASE("single edge identity by simulation") {
  Graph se = Graph::single_edge();
  EdgeWeights a({4.0});
  McmcParams p = quick_params(81, 15000, 80000);
  WardReport w = ward_identity_estimate(se, a, 0, 0, 1, 1.0, p);
  CHECK(w.target == 1.0);
  CHECK(w.z < 4.0);
  CHECK(w.samples == 4 * 8000);

  WardReport b = single_edge_b_moment(a, 1.0, p);
  CHECK(b.target == doctest::Approx(4.0 / 3.0));
  CHECK(b.z < 4.0);

  // the moment requirement m < a is enforced
  CHECK_THROWS_AS(single_edge_b_moment(a, 4.0, p), std::invalid_argument);
  CHECK_THROWS_AS(ward_identity_estimate(se, a, 0, 0, 1, 1.1, p), std::invalid_argument);
}

TEST_CASE("identity holds for a non adjacent pair") {
  Graph path = Graph::path(3);
  EdgeWeights a = EdgeWeights::uniform(path, 6.0);
  McmcParams p = quick_params(82, 15000, 80000);
  WardReport w = ward_identity_estimate(path, a, 0, 0, 2, 1.0, p);
  CHECK(w.z < 4.0);
}

TEST_CASE("protected product over two disjoint regions") {
  Graph path = Graph::path(4);
  EdgeWeights a = EdgeWeights::uniform(path, 8.0);
  std::vector<WardRegion> regions = {{0, 1, {0, 1}}, {2, 3, {2, 3}}};
  std::vector<double> m = {1.0, 1.0};
  ChiParams cp;
  McmcParams p = quick_params(83, 15000, 60000);
  ProtectedReports rep = protected_ward_estimate(path, a, 0, regions, m, cp, p);
  CHECK(rep.plain.is_bound);
  CHECK(rep.plain.z < 4.0);
  CHECK(rep.gated.z < 4.0);
  // single edge regions have deterministic free-boundary resistance 1/a
  CHECK(rep.c_empirical == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.moments.target == doctest::Approx(64.0 / 49.0).epsilon(1e-12));
  CHECK(rep.moments.z < 4.0);

  std::vector<WardRegion> overlap = {{0, 1, {0, 1}}, {1, 2, {1, 2}}};
  CHECK_THROWS_AS(protected_ward_estimate(path, a, 0, overlap, m, cp, p),
                  std::invalid_argument);
  std::vector<double> mbig = {3.0, 1.0};
  CHECK_THROWS_AS(protected_ward_estimate(path, a, 0, regions, mbig, cp, p),
                  std::invalid_argument);
  std::vector<WardRegion> split = {{0, 2, {0, 2}}};
  std::vector<double> mone = {1.0};
  CHECK_THROWS_AS(protected_ward_estimate(path, a, 0, split, mone, cp, p),
                  std::invalid_argument);
}

TEST_CASE("moment product bound") {
  Graph tri = Graph::cycle(3);
  EdgeWeights a = EdgeWeights::uniform(tri, 4.0);
  McmcParams p = quick_params(84, 15000, 60000);
  WardReport rep = moment_bound_estimate(tri, a, 0, {0, 1}, {1.0, 1.0}, p);
  CHECK(rep.is_bound);
  CHECK(rep.target == 4.0);
  CHECK(rep.z < 4.0);
  CHECK_THROWS_AS(moment_bound_estimate(tri, a, 0, {0, 1}, {1.0, 2.5}, p),
                  std::invalid_argument);
}

TEST_CASE("fluctuation moments stay under the bound") {
  Graph se = Graph::single_edge();
  EdgeWeights a({8.0});
  McmcParams p = quick_params(85, 10000, 40000);
  std::vector<WardReport> reps = fluctuation_estimate(se, a, 0, {{0, 1}}, 2.0, p);
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].name.substr(0, 5) == "fluct");
  CHECK(reps[0].is_bound);
  CHECK(reps[0].target == 2.0);
  CHECK(reps[0].estimate < 2.0);
  CHECK(reps[0].z < 4.0);
}

TEST_CASE("goodness scan basics") {
  LatticeBox box(3, 2);
  ChiParams cp;
  FieldConfig zero = FieldConfig::zero((int)box.vertex_count());
  CHECK(is_n_good(box, zero, Point{0, 0, 0}, 1, cp));
  CHECK_THROWS_AS(is_n_good(box, zero, Point{3, 0, 0}, 1, cp), std::invalid_argument);

  GoodPointReport flat = good_point_check(box, zero, cp, 1, 2.0, Point{0, 0, 0});
  CHECK(!flat.no_good_point);
  CHECK(flat.holds);
  CHECK(flat.tree_count == 2);

  // odd parity sites lifted: every point has a bad neighbor, so the scan
  // finds no good point and the tree sum must certify it
  FieldConfig cb = zero;
  for (int i = 0; i < (int)box.vertex_count(); ++i) {
    Point p = box.point_of(i);
    if ((l1_norm(p) % 2) != 0) cb.u[(size_t)i] = 1.5;
  }
  CHECK(!is_n_good(box, cb, Point{0, 0, 0}, 1, cp));
  GoodPointReport hot = good_point_check(box, cb, cp, 1, 2.0, Point{0, 0, 0});
  CHECK(hot.no_good_point);
  CHECK(hot.rhs >= 1.0);
  CHECK(hot.holds);
}

TEST_CASE("tree sum equals explicit leaf set enumeration") {
  LatticeBox box(2, 8);
  SubcubeTree tree = subcube_tree(2, 2, Point{0, 0});
  ChiParams cp;
  Rng rng(86);
  FieldConfig f = FieldConfig::zero((int)box.vertex_count());
  for (size_t i = 1; i < f.u.size(); ++i) {
    f.u[i] = 0.5 * rng.normal();
    f.s[i] = 0.5 * rng.normal();
  }
  double m_exp = 2.0;
  double got = good_point_rhs(box, f, cp, tree, m_exp);

  // oracle: band sums per node, then an explicit sum over admissible leaf sets
  auto band = [&](int node) {
    const SubcubeNode& nd = tree.nodes[(size_t)node];
    double hi = std::pow(4.0, tree.scale - nd.depth), lo = hi / 4.0;
    double total = 0;
    for (const Point& x : tree.cube_points(node)) {
      int ix = box.index_of(x);
      for (int yi = 0; yi < (int)box.vertex_count(); ++yi) {
        double dist = l2_dist(box.point_of(yi), x);
        if (dist <= lo + 1e-12 || dist > hi + 1e-12) continue;
        total += std::pow(b_quantity(f, ix, yi) / (cp.b * std::pow(dist, cp.alpha)), m_exp);
      }
    }
    return total;
  };
  std::vector<double> s(tree.nodes.size());
  for (size_t nid = 0; nid < tree.nodes.size(); ++nid) s[nid] = band((int)nid);
  double want = 0;
  std::vector<std::vector<int>> leafsets = tree.enumerate_leaf_sets();
  CHECK(leafsets.size() == 17);
  for (const auto& ls : leafsets) {
    double prod = 1;
    for (int node : ls) prod *= s[(size_t)node];
    want += prod;
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-12));

  // inequality on perturbed fields, including configurations with no good point
  int no_good = 0;
  for (int t = 0; t < 15; ++t) {
    FieldConfig g = FieldConfig::zero((int)box.vertex_count());
    for (size_t i = 1; i < g.u.size(); ++i) {
      g.u[i] = 1.2 * rng.normal();
      g.s[i] = 0.4 * rng.normal();
    }
    GoodPointReport rep = good_point_check(box, g, cp, 2, m_exp, Point{0, 0});
    if (rep.no_good_point) ++no_good;
    CHECK(rep.holds);
  }
  MESSAGE("fields without a good point: ", no_good, " of 15");

  SubcubeTree off = subcube_tree(2, 2, Point{8, 8});
  CHECK_THROWS_AS(good_point_rhs(box, f, cp, off, m_exp), std::invalid_argument);
  CHECK_THROWS_AS(good_point_rhs(box, f, cp, tree, 0.0), std::invalid_argument);
}

TEST_CASE("degenerate pipeline value is exact and weight free") {
  for (int dim : {1, 2, 3}) {
    LatticeBox box(dim, 2);
    Graph g = box.graph();
    ConductanceNetwork net;
    net.g = g;
    net.c.assign(g.edges.size(), 1.0);
    net.root = box.center_index();
    double runit = effective_resistance_to_set(net, box.center_index(), box.boundary_indices());
    double lo = pipeline_constant_case(dim, 2, 0.7);
    double hi = pipeline_constant_case(dim, 2, 3.1);
    CHECK(lo == doctest::Approx(2.0 * dim * runit).epsilon(1e-12));
    // weight free in exact arithmetic; the solve leaves ulp noise
    CHECK(lo == doctest::Approx(hi).epsilon(1e-12));
  }
}

TEST_CASE("pipeline on a small box") {
  McmcParams p = quick_params(87, 3000, 3000);
  p.chains = 2;
  PipelineReport rep = transience_pipeline_check(2, 2, 2.0, p);
  CHECK(rep.samples == 2 * 300);
  CHECK(rep.jensen_ok);
  CHECK(rep.mean_w_r > 0);
  CHECK(rep.mean_p > 0);
  CHECK(rep.mean_p < 1);

  LatticeBox box(2, 2);
  Graph g = box.graph();
  ConductanceNetwork net;
  net.g = g;
  net.c.assign(g.edges.size(), 1.0);
  net.root = box.center_index();
  double runit = effective_resistance_to_set(net, box.center_index(), box.boundary_indices());
  CHECK(rep.unit_resistance == doctest::Approx(runit).epsilon(1e-12));
  CHECK(rep.ratio == doctest::Approx(rep.mean_w_r / runit).epsilon(1e-12));
}

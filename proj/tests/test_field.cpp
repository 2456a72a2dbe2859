#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "errw/field.hpp"
#include "errw/quadrature.hpp"
#include "errw/rng.hpp"
#include "errw/stats.hpp"

using namespace errw;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Brute-force weighted spanning tree sum: every (n-1)-subset of edges that
// connects all vertices contributes the product of its conductances.
double tree_sum(const Graph& g, const std::vector<double>& c) {
  int n = g.n;
  int m = (int)g.edges.size();
  double total = 0;
  std::vector<int> pick;
  std::vector<int> parent((size_t)n);
  std::function<int(int)> find = [&](int v) {
    while (parent[(size_t)v] != v) v = parent[(size_t)v] = parent[(size_t)parent[(size_t)v]];
    return v;
  };
  std::function<void(int, int)> rec = [&](int next, int need) {
    if (need == 0) {
      std::iota(parent.begin(), parent.end(), 0);
      int comps = n;
      double prod = 1;
      for (int e : pick) {
        prod *= c[(size_t)e];
        int a = find(g.edges[(size_t)e].first), b = find(g.edges[(size_t)e].second);
        if (a != b) {
          parent[(size_t)a] = b;
          --comps;
        }
      }
      if (comps == 1) total += prod;
      return;
    }
    if (m - next < need) return;
    pick.push_back(next);
    rec(next + 1, need - 1);
    pick.pop_back();
    rec(next + 1, need);
  };
  rec(0, n - 1);
  return total;
}

Eigen::MatrixXd laplacian_of(const Graph& g, const std::vector<double>& c) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(g.n, g.n);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    L(i, i) += c[e];
    L(j, j) += c[e];
    L(i, j) -= c[e];
    L(j, i) -= c[e];
  }
  return L;
}

Graph random_connected_graph(Rng& rng, int maxv) {
  int n = 2 + (int)(rng.uniform() * (maxv - 1));
  if (n > maxv) n = maxv;
  Graph g;
  g.n = n;
  for (int v = 1; v < n; ++v) g.edges.push_back({(int)(rng.uniform() * v), v});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < 0.3) g.edges.push_back({i, j});
  g.finalize();
  return g;
}

}  // namespace

TEST_CASE("edge weights validation") {
  CHECK_THROWS_WITH_AS(EdgeWeights({1.0, 0.0, 2.0}), doctest::Contains("edge 1"),
                       std::invalid_argument);
  EdgeWeights a({0.5, 2.0, 1.5});
  CHECK(a.min_weight() == 0.5);
  CHECK(a.size() == 3);
  CHECK(a[2] == 1.5);
  EdgeWeights u = EdgeWeights::uniform(Graph::cycle(4), 1.25);
  CHECK(u.size() == 4);
  CHECK(u[3] == 1.25);
}

TEST_CASE("field config validation") {
  FieldConfig f = FieldConfig::zero(3, 1);
  CHECK(f.root == 1);
  CHECK_NOTHROW(f.validate(3));
  f.u[1] = 0.2;
  CHECK_THROWS_AS(f.validate(3), std::invalid_argument);
  f.u[1] = 0.0;
  CHECK_THROWS_AS(f.validate(4), std::invalid_argument);
}

TEST_CASE("b quantity") {
  FieldConfig f = FieldConfig::zero(3);
  f.u = {0.0, 0.7, -0.4};
  f.s = {0.0, 0.3, 1.1};
  f.root = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double b = b_quantity(f, i, j);
      CHECK(b == b_quantity(f, j, i));
      CHECK(b >= 1.0);
      double manual = std::cosh(f.u[(size_t)i] - f.u[(size_t)j]) +
                      0.5 * std::exp(f.u[(size_t)i] + f.u[(size_t)j]) *
                          (f.s[(size_t)i] - f.s[(size_t)j]) * (f.s[(size_t)i] - f.s[(size_t)j]);
      CHECK(b == doctest::Approx(manual).epsilon(1e-15));
    }
  CHECK(b_quantity(f, 1, 1) == 1.0);
}

TEST_CASE("matrix tree identity against subset enumeration") {
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    Graph g = random_connected_graph(rng, 6);
    std::vector<double> c(g.edges.size());
    for (double& v : c) v = 0.1 + 2.9 * rng.uniform();
    double want = tree_sum(g, c);
    Eigen::MatrixXd L = laplacian_of(g, c);
    for (int r = 0; r < g.n; ++r) {
      double got = diagonal_minor(L, r);
      CHECK(std::abs(got - want) <= 1e-9 * want);
      CHECK(log_diagonal_minor(L, r) == doctest::Approx(std::log(want)).epsilon(1e-9));
    }
  }
}

TEST_CASE("minor rejects malformed input") {
  Eigen::MatrixXd notlap(2, 2);
  notlap << 1.0, -0.5, -0.5, 1.0;  // rows do not sum to zero
  CHECK_THROWS_AS(diagonal_minor(notlap, 0), std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << -1.0, 1.0, 1.0, -1.0;  // Laplacian-like but indefinite
  CHECK_THROWS_AS(diagonal_minor(neg, 0), std::runtime_error);
}

TEST_CASE("h energy") {
  Graph g = Graph::path(3);
  std::vector<double> w = {2.0, 0.5};
  std::vector<double> u = {0.0, 1.0, -1.0};
  double want = 2.0 * (std::cosh(1.0) - 1.0) + 0.5 * (std::cosh(2.0) - 1.0);
  CHECK(h_energy(g, w, u) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("density reports are internally consistent") {
  Graph tri = Graph::cycle(3);
  EdgeWeights a({1.0, 2.0, 0.5});
  std::vector<double> w = {0.8, 1.1, 0.4};
  FieldConfig f = FieldConfig::zero(3);
  f.u = {0.0, 0.4, -0.7};
  f.s = {0.0, 0.9, 0.2};
  for (const LogDensityReport& r :
       {log_density_u(tri, w, f.u, 0), log_density_us(tri, a, f),
        log_density_joint_wus(tri, a, w, f)}) {
    CHECK(r.total ==
          doctest::Approx(r.log_prefactor + r.log_b_product + r.log_minor).epsilon(1e-14));
    CHECK(std::isfinite(r.total));
  }
}

TEST_CASE("u marginal density normalizes on a single edge") {
  Graph se = Graph::single_edge();
  for (double w : {0.5, 1.5}) {
    std::vector<double> wv = {w};
    double mass = adaptive_simpson(
        [&](double u) {
          std::vector<double> uv = {0.0, u};
          return std::exp(log_density_u(se, wv, uv, 0).total);
        },
        -45.0, 45.0, 1e-7);
    CHECK(std::abs(mass - 1.0) < 1e-4);
  }
}

TEST_CASE("u marginal density matches a direct transcription on the triangle") {
  Graph tri = Graph::cycle(3);
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> w = {0.2 + rng.uniform(), 0.2 + rng.uniform(), 0.2 + rng.uniform()};
    std::vector<double> u = {0.0, rng.normal(), rng.normal()};
    LogDensityReport r = log_density_u(tri, w, u, 0);
    // independent transcription: prefactor, cosh coupling, sqrt of the
    // grounded determinant of the u-tilted conductances
    double coup = 0;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(3, 3);
    for (size_t e = 0; e < tri.edges.size(); ++e) {
      auto [i, j] = tri.edges[e];
      coup += w[e] * (std::cosh(u[(size_t)i] - u[(size_t)j]) - 1.0);
      double c = w[e] * std::exp(u[(size_t)i] + u[(size_t)j]);
      L(i, i) += c;
      L(j, j) += c;
      L(i, j) -= c;
      L(j, i) -= c;
    }
    double det = L(1, 1) * L(2, 2) - L(1, 2) * L(2, 1);
    double manual = -std::log(2.0 * kPi) - (u[1] + u[2]) - coup + 0.5 * std::log(det);
    CHECK(r.total == doctest::Approx(manual).epsilon(1e-12));
  }
}

TEST_CASE("integrated field density closed form on a single edge") {
  Graph se = Graph::single_edge();
  Rng rng(23);
  for (double av : {0.7, 2.0, 4.0}) {
    EdgeWeights a({av});
    for (int t = 0; t < 10; ++t) {
      FieldConfig f = FieldConfig::zero(2);
      f.u[1] = rng.normal();
      f.s[1] = rng.normal();
      double b = b_quantity(f, 0, 1);
      double want = std::log(av / (2.0 * kPi)) - (av + 1.0) * std::log(b);
      CHECK(log_density_us(se, a, f).total == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("joint density and its weight marginal on a single edge") {
  Graph se = Graph::single_edge();
  double av = 1.4;
  EdgeWeights a({av});
  Rng rng(24);
  for (int t = 0; t < 3; ++t) {
    FieldConfig f = FieldConfig::zero(2);
    f.u[1] = 0.5 * rng.normal();
    f.s[1] = 0.5 * rng.normal();
    double b = b_quantity(f, 0, 1);
    // pointwise: manual product of the three factors
    double w0 = 0.9;
    double manual = std::log(1.0 / (2.0 * kPi)) - f.u[1] - w0 * (b - 1.0) +
                    std::log(w0 * std::exp(f.u[1])) + (av - 1.0) * std::log(w0) - w0 -
                    std::lgamma(av);
    CHECK(log_density_joint_wus(se, a, {w0}, f).total == doctest::Approx(manual).epsilon(1e-12));
    // integrating the weight out recovers the closed-form field density
    double marg = integrate_half_line(
        [&](double w) { return std::exp(log_density_joint_wus(se, a, {w}, f).total); },
        1e-12);
    double want = std::exp(log_density_us(se, a, f).total);
    CHECK(marg == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("field sampler reproduces single edge moments") {
  Graph se = Graph::single_edge();
  EdgeWeights a({4.0});
  McmcParams p;
  p.burnin_sweeps = 20000;
  p.retained_sweeps = 120000;
  p.thin = 10;
  p.chains = 4;
  p.seed = 71;
  FieldRun run = sample_field_mcmc(se, a, 0, p);
  for (const ChainDiagnostics& d : run.diag) {
    CHECK(!d.accept_flagged);
    CHECK(d.step_u > 0);
    CHECK(d.step_s > 0);
  }
  std::vector<const FieldSample*> all = run.all();
  std::vector<double> bvals, cosh_u;
  for (const FieldSample* s : all) {
    FieldConfig f;
    f.root = 0;
    f.u = s->u;
    f.s = s->s;
    bvals.push_back(b_quantity(f, 0, 1));
    cosh_u.push_back(std::cosh(s->u[1]));
  }
  McEstimate eb = batch_means(bvals);
  CHECK(z_score(eb, 4.0 / 3.0) < 4.0);

  // independent quadrature target for <cosh u> under the same law
  double target = adaptive_simpson_2d(
      [](double u, double t) {
        double b = std::cosh(u) + 0.5 * t * t;
        return std::cosh(u) * (4.0 / (2.0 * kPi)) * std::pow(b, -5.0) * std::exp(-0.5 * u);
      },
      -30.0, 30.0, -200.0, 200.0, 1e-7);
  McEstimate ec = batch_means(cosh_u);
  CHECK(z_score(ec, target) < 4.0);
}

TEST_CASE("joint sampler reproduces the gamma law of w times b") {
  Graph se = Graph::single_edge();
  double av = 3.0;
  EdgeWeights a({av});
  McmcParams p;
  p.burnin_sweeps = 20000;
  p.retained_sweeps = 120000;
  p.thin = 10;
  p.chains = 4;
  p.seed = 72;
  JointRun run = sample_joint_mcmc(se, a, 0, p);
  std::vector<double> tvals;
  for (const JointSample* s : run.all()) {
    FieldConfig f;
    f.root = 0;
    f.u = s->u;
    f.s = s->s;
    tvals.push_back(s->w[0] * b_quantity(f, 0, 1));
  }
  // w * B is Gamma(a+1, 1) regardless of the field
  McEstimate em = batch_means(tvals);
  CHECK(z_score(em, av + 1.0) < 4.0);
  std::vector<double> sq(tvals.size());
  for (size_t i = 0; i < tvals.size(); ++i)
    sq[i] = (tvals[i] - (av + 1.0)) * (tvals[i] - (av + 1.0));
  McEstimate ev = batch_means(sq);
  CHECK(z_score(ev, av + 1.0) < 5.0);
}

TEST_CASE("serial and parallel sampling are bit identical") {
  Graph tri = Graph::cycle(3);
  EdgeWeights a({1.0, 1.5, 0.7});
  McmcParams p;
  p.burnin_sweeps = 2000;
  p.retained_sweeps = 2000;
  p.thin = 10;
  p.chains = 3;
  p.seed = 73;
  p.mode = ExecMode::Serial;
  FieldRun fs = sample_field_mcmc(tri, a, 0, p);
  JointRun js = sample_joint_mcmc(tri, a, 0, p);
  p.mode = ExecMode::Parallel;
  FieldRun fp = sample_field_mcmc(tri, a, 0, p);
  JointRun jp = sample_joint_mcmc(tri, a, 0, p);
  REQUIRE(fs.chains.size() == fp.chains.size());
  for (size_t c = 0; c < fs.chains.size(); ++c) {
    REQUIRE(fs.chains[c].size() == fp.chains[c].size());
    for (size_t k = 0; k < fs.chains[c].size(); ++k) {
      CHECK(fs.chains[c][k].u == fp.chains[c][k].u);
      CHECK(fs.chains[c][k].s == fp.chains[c][k].s);
    }
  }
  for (size_t c = 0; c < js.chains.size(); ++c)
    for (size_t k = 0; k < js.chains[c].size(); ++k) {
      CHECK(js.chains[c][k].w == jp.chains[c][k].w);
      CHECK(js.chains[c][k].u == jp.chains[c][k].u);
    }
}

TEST_CASE("sampler validates parameters") {
  Graph se = Graph::single_edge();
  EdgeWeights a({1.0});
  McmcParams p;
  p.chains = 0;
  CHECK_THROWS_AS(sample_field_mcmc(se, a, 0, p), std::invalid_argument);
  McmcParams q;
  q.thin = 0;
  CHECK_THROWS_AS(sample_joint_mcmc(se, a, 0, q), std::invalid_argument);
}

TEST_CASE("sample export formats") {
  FieldConfig f = FieldConfig::zero(3);
  f.u = {0.0, 0.25, -1.5};
  f.s = {0.0, 2.0, 0.125};
  nlohmann::json j = nlohmann::json::parse(field_samples_json(f));
  CHECK(j["u"].size() == 3);
  CHECK(j["s"][1] == 2.0);

  ChainDiagnostics d;
  d.log_density = {-1.5, -2.25, -1.0};
  std::stringstream ss;
  write_chain_trace_csv(ss, d, 10);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "sample,sweep,log_density");
  std::getline(ss, line);
  CHECK(line == "0,10,-1.5");
  std::getline(ss, line);
  CHECK(line == "1,20,-2.25");
}

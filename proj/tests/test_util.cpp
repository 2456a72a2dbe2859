#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errw/parallel.hpp"
#include "errw/quadrature.hpp"
#include "errw/report.hpp"
#include "errw/rng.hpp"
#include "errw/stats.hpp"

using namespace errw;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  int distinct_c = 0, distinct_d = 0;
  for (int i = 0; i < 64; ++i) {
    uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) ++distinct_c;
    if (va != d.next_u64()) ++distinct_d;
  }
  CHECK(distinct_c > 60);
  CHECK(distinct_d > 60);
}

TEST_CASE("rng uniform ranges") {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = r.uniform_pos();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

static void moments(Rng& r, int n, double (Rng::*draw)(double), double arg, double* m,
                    double* v) {
  std::vector<double> x((size_t)n);
  for (int i = 0; i < n; ++i) x[(size_t)i] = (r.*draw)(arg);
  *m = mean_of(x);
  *v = variance_of(x);
}

TEST_CASE("gamma moments") {
  Rng r(202);
  int n = 400000;
  double m, v;
  moments(r, n, &Rng::gamma, 4.0, &m, &v);
  CHECK(std::abs(m - 4.0) < 0.02);
  CHECK(std::abs(v - 4.0) < 0.06);
  moments(r, n, &Rng::gamma, 0.5, &m, &v);
  CHECK(std::abs(m - 0.5) < 0.006);
  CHECK(std::abs(v - 0.5) < 0.015);
  CHECK_THROWS_AS(r.gamma(0.0), std::invalid_argument);
}

TEST_CASE("normal and exponential moments") {
  Rng r(303);
  int n = 200000;
  std::vector<double> x((size_t)n);
  for (int i = 0; i < n; ++i) x[(size_t)i] = r.normal();
  CHECK(std::abs(mean_of(x)) < 0.01);
  CHECK(std::abs(variance_of(x) - 1.0) < 0.03);
  for (int i = 0; i < n; ++i) x[(size_t)i] = r.exponential(2.0);
  CHECK(std::abs(mean_of(x) - 0.5) < 0.008);
  CHECK_THROWS_AS(r.exponential(0.0), std::invalid_argument);
}

TEST_CASE("categorical frequencies") {
  Rng r(404);
  double w[3] = {1.0, 2.0, 1.0};
  int n = 90000;
  int cnt[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) ++cnt[r.categorical(w, 3)];
  CHECK(std::abs(cnt[0] / (double)n - 0.25) < 0.008);
  CHECK(std::abs(cnt[1] / (double)n - 0.50) < 0.008);
  CHECK(std::abs(cnt[2] / (double)n - 0.25) < 0.008);
  double z[2] = {0.0, 0.0};
  CHECK_THROWS_AS(r.categorical(z, 2), std::invalid_argument);
}

TEST_CASE("batch means on iid and correlated input") {
  Rng r(505);
  int n = 5000;
  std::vector<double> iid((size_t)n);
  for (int i = 0; i < n; ++i) iid[(size_t)i] = r.uniform();
  McEstimate e = batch_means(iid);
  CHECK(e.samples == n);
  CHECK(std::abs(e.mean - mean_of(iid)) < 1e-12);
  double se_iid = std::sqrt(variance_of(iid) / n);
  CHECK(e.se > 0.5 * se_iid);
  CHECK(e.se < 2.0 * se_iid);
  CHECK(e.ess > n / 2.0);
  CHECK(e.ess <= (double)n);

  // AR(1) with strong positive correlation: the error bar must widen and the
  // equivalent sample count must collapse well below n.
  std::vector<double> ar((size_t)n);
  double x = 0;
  for (int i = 0; i < n; ++i) {
    x = 0.9 * x + r.normal();
    ar[(size_t)i] = x;
  }
  McEstimate ea = batch_means(ar);
  CHECK(ea.ess < n / 2.0);
  CHECK(ea.se > std::sqrt(variance_of(ar) / n));

  CHECK_THROWS_AS(batch_means(iid, 1), std::invalid_argument);
  std::vector<double> tiny(10, 1.0);
  CHECK_THROWS_AS(batch_means(tiny, 50), std::invalid_argument);
}

TEST_CASE("z scores and verdicts") {
  McEstimate e;
  e.mean = 1.2;
  e.se = 0.1;
  CHECK(z_score(e, 1.0) == doctest::Approx(2.0));
  CHECK(z_upper(e, 1.3) == 0.0);
  CHECK(z_upper(e, 1.0) == doctest::Approx(2.0));
  CHECK(verdict_for(2.9) == "pass");
  CHECK(verdict_for(3.5) == "marginal");
  CHECK(verdict_for(4.5) == "suspicious");
  CHECK(verdict_pass("pass"));
  CHECK(!verdict_pass("marginal"));
  McEstimate exact;
  exact.mean = 2.0;
  exact.se = 0.0;
  CHECK(z_score(exact, 2.0) == 0.0);
  CHECK(std::isinf(z_score(exact, 2.5)));
}

TEST_CASE("ks two sample accepts equal laws and rejects a shift") {
  Rng r(606);
  int n = 2000;
  std::vector<double> a((size_t)n), b((size_t)n), c((size_t)n);
  for (int i = 0; i < n; ++i) {
    a[(size_t)i] = r.normal();
    b[(size_t)i] = r.normal();
    c[(size_t)i] = r.normal() + 1.0;
  }
  double stat = 0;
  CHECK(ks_two_sample(a, b, 0.01, &stat));
  CHECK(stat >= 0.0);
  CHECK(!ks_two_sample(a, c, 0.01));
}

TEST_CASE("ks one sample against an exact cdf") {
  Rng r(707);
  int n = 2000;
  std::vector<double> a((size_t)n);
  for (int i = 0; i < n; ++i) a[(size_t)i] = r.uniform();
  auto unif_cdf = [](double t) { return t < 0 ? 0.0 : (t > 1 ? 1.0 : t); };
  auto wrong_cdf = [](double t) { return t < 0 ? 0.0 : (t > 1 ? 1.0 : t * t); };
  CHECK(ks_one_sample(a, unif_cdf, 0.01));
  CHECK(!ks_one_sample(a, wrong_cdf, 0.01));
  CHECK_THROWS_AS(ks_one_sample(a, unif_cdf, 0.2), std::invalid_argument);
}

TEST_CASE("total variation") {
  CHECK(total_variation({0.5, 0.5}, {1.0, 0.0}) == doctest::Approx(0.5));
  CHECK(total_variation({0.25, 0.75}, {0.25, 0.75}) == 0.0);
  CHECK_THROWS_AS(total_variation({1.0}, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("adaptive simpson in one and two dimensions") {
  double i1 = adaptive_simpson([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(i1 - 1.0 / 3.0) < 1e-10);
  double mass = adaptive_simpson(
      [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }, -8.0, 8.0,
      1e-11);
  CHECK(std::abs(mass - 1.0) < 1e-9);
  double i2 = adaptive_simpson_2d([](double x, double y) { return x * y; }, 0.0, 1.0, 0.0,
                                  1.0, 1e-10);
  CHECK(std::abs(i2 - 0.25) < 1e-8);
  double g2 = adaptive_simpson_2d(
      [](double x, double y) { return std::exp(-x * x - y * y); }, -6.0, 6.0, -6.0, 6.0,
      1e-9);
  CHECK(std::abs(g2 - kPi) < 1e-6);
}

TEST_CASE("half line integral reproduces gamma function values") {
  for (double s : {0.5, 1.0, 4.5}) {
    double g = integrate_half_line(
        [s](double w) { return std::pow(w, s - 1.0) * std::exp(-w); }, 1e-12);
    CHECK(std::abs(g - std::tgamma(s)) < 1e-7 * std::tgamma(s));
  }
}

TEST_CASE("run_indexed serial and parallel agree and propagate errors") {
  int n = 500;
  std::vector<double> rs((size_t)n), rp((size_t)n);
  run_indexed(n, ExecMode::Serial, [&](int i) { rs[(size_t)i] = std::sqrt((double)i); });
  run_indexed(n, ExecMode::Parallel, [&](int i) { rp[(size_t)i] = std::sqrt((double)i); });
  CHECK(rs == rp);
  CHECK_THROWS_WITH_AS(
      run_indexed(4, ExecMode::Parallel,
                  [](int i) {
                    if (i == 2) throw std::runtime_error("boom");
                  }),
      "parallel worker failed: boom", std::runtime_error);
}

TEST_CASE("fmt_double round trips") {
  for (double v : {0.0, 1.0 / 3.0, 0.1, -2.5e-17, 1e300, 42.0, -1234.5678}) {
    std::string s = fmt_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("run ledger header and rows") {
  auto path = std::filesystem::temp_directory_path() / "errw_ledger_test.csv";
  std::filesystem::remove(path);
  McEstimate e;
  e.mean = 1.01;
  e.se = 0.02;
  e.samples = 1000;
  e.ess = 800;
  WardReport r1 = make_report("alpha", e, 1.0, false);
  WardReport r2 = make_report("beta", e, 1.1, true);
  append_run_ledger(path.string(), r1);
  append_run_ledger(path.string(), r2);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "name,estimate,se,target,z,verdict,samples,ess");
  std::getline(in, line);
  CHECK(line.substr(0, 6) == "alpha,");
  std::getline(in, line);
  CHECK(line.substr(0, 5) == "beta,");
  CHECK(!std::getline(in, line));
  std::filesystem::remove(path);
}

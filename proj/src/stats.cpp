#include "errw/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace errw {

double mean_of(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0;
  for (double v : x) s += v;
  return s / (double)x.size();
}

double variance_of(const std::vector<double>& x) {
  if (x.size() < 2) throw std::invalid_argument("variance_of: need at least 2 samples");
  double m = mean_of(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (double)(x.size() - 1);
}

McEstimate batch_means(const std::vector<double>& x, int nbatch) {
  if (nbatch < 2) throw std::invalid_argument("batch_means: nbatch must be >= 2");
  if ((int64_t)x.size() < 2 * nbatch)
    throw std::invalid_argument("batch_means: need at least 2 samples per batch");
  int64_t n = (int64_t)x.size();
  int64_t per = n / nbatch;  // trailing remainder is ignored
  std::vector<double> bm((size_t)nbatch);
  for (int b = 0; b < nbatch; ++b) {
    double s = 0;
    for (int64_t k = b * per; k < (b + 1) * per; ++k) s += x[(size_t)k];
    bm[(size_t)b] = s / (double)per;
  }
  McEstimate e;
  e.mean = mean_of(bm);
  double vb = variance_of(bm);
  e.se = std::sqrt(vb / (double)nbatch);
  e.samples = n;
  if (e.se > 0) {
    double vx = variance_of(x);
    e.ess = std::min((double)n, vx / (e.se * e.se));
  } else {
    e.ess = (double)n;
  }
  return e;
}

double z_score(const McEstimate& e, double target) {
  if (e.se <= 0) return e.mean == target ? 0 : INFINITY;
  return std::abs(e.mean - target) / e.se;
}

double z_upper(const McEstimate& e, double bound) {
  if (e.mean <= bound) return 0;
  if (e.se <= 0) return INFINITY;
  return (e.mean - bound) / e.se;
}

std::string verdict_for(double z) {
  if (z <= 3.0) return "pass";
  if (z <= 4.0) return "marginal";
  return "suspicious";
}

bool verdict_pass(const std::string& v) { return v == "pass"; }

namespace {

double ks_critical(double level) {
  if (level == 0.01) return 1.62762;
  if (level == 0.05) return 1.35810;
  throw std::invalid_argument("ks: supported levels are 0.01 and 0.05");
}

}  // namespace

bool ks_two_sample(std::vector<double> a, std::vector<double> b, double level,
                   double* stat_out) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = (double)a.size(), nb = (double)b.size();
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs((double)i / na - (double)j / nb));
  }
  if (stat_out) *stat_out = d;
  double crit = ks_critical(level) * std::sqrt((na + nb) / (na * nb));
  return d <= crit;
}

bool ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf,
                   double level, double* stat_out) {
  if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  double n = (double)a.size();
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double f = cdf(a[i]);
    d = std::max(d, std::abs((double)(i + 1) / n - f));
    d = std::max(d, std::abs(f - (double)i / n));
  }
  if (stat_out) *stat_out = d;
  return d <= ks_critical(level) / std::sqrt(n);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0;
  for (size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace errw

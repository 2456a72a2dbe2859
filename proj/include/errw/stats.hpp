#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace errw {

// Monte Carlo estimate with a batch-means error bar.
struct McEstimate {
  double mean = 0;
  double se = 0;        // batch-means standard error of the mean
  int64_t samples = 0;  // raw (thinned) sample count behind the mean
  double ess = 0;       // equivalent independent sample count, capped at samples
};

// Batch-means estimate over a correlated sample stream. The stream is cut
// into nbatch contiguous batches; se = sd(batch means)/sqrt(nbatch).
McEstimate batch_means(const std::vector<double>& x, int nbatch = 50);

// z-score of an estimate against an exact target (two-sided).
double z_score(const McEstimate& e, double target);

// z-score against an upper bound: 0 when est <= bound, overshoot/se otherwise.
double z_upper(const McEstimate& e, double bound);

// pass: z <= 3; marginal: 3 < z <= 4 (still suspicious for exit codes);
// suspicious: z > 4. Distinguishes "verified" from "inconsistent".
std::string verdict_for(double z);
bool verdict_pass(const std::string& v);

// Two-sample Kolmogorov-Smirnov test. Returns true when the samples are
// consistent at the given level (supported: 0.01, 0.05).
bool ks_two_sample(std::vector<double> a, std::vector<double> b, double level = 0.01,
                   double* stat_out = nullptr);

// One-sample KS against an exact cdf.
bool ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf,
                   double level = 0.01, double* stat_out = nullptr);

// Total variation distance between two discrete distributions given as
// aligned probability vectors.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

double mean_of(const std::vector<double>& x);
double variance_of(const std::vector<double>& x);

}  // namespace errw

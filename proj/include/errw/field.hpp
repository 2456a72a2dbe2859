#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "errw/geometry.hpp"
#include "errw/parallel.hpp"

namespace errw {

// Positive initial edge weights a_e. Rejects non-positive entries up front.
class EdgeWeights {
public:
  explicit EdgeWeights(std::vector<double> a);
  static EdgeWeights uniform(const Graph& g, double a);

  double operator[](int e) const { return a_[(size_t)e]; }
  int size() const { return (int)a_.size(); }
  double min_weight() const { return min_; }
  const std::vector<double>& values() const { return a_; }

private:
  std::vector<double> a_;
  double min_ = 0;
};

// Environment field (u, s) with the root pinned to zero in both coordinates.
struct FieldConfig {
  int root = 0;
  std::vector<double> u, s;

  static FieldConfig zero(int n, int root = 0);
  void validate(int n) const;  // sizes match, root entries exactly zero
};

// B_xy = cosh(u_x-u_y) + (1/2) e^{u_x+u_y} (s_x-s_y)^2, defined for every
// vertex pair, symmetric, and always >= 1.
double b_quantity(const FieldConfig& f, int x, int y);

// Sum over edges of w_e (cosh(u_i-u_j) - 1).
double h_energy(const Graph& g, const std::vector<double>& w, const std::vector<double>& u);

// Weighted-Laplacian with edge conductances w_e e^{u_i+u_j}.
Eigen::MatrixXd field_laplacian(const Graph& g, const std::vector<double>& w,
                                const std::vector<double>& u);

// Weighted-Laplacian with edge conductances a_e e^{u_i+u_j} / B_e.
Eigen::MatrixXd mixed_laplacian(const Graph& g, const EdgeWeights& a, const FieldConfig& f);

// Determinant of the matrix with row/column `removed` deleted. Requires rows
// and columns to sum to zero within tolerance (Laplacian-like input) so the
// result is independent of the removed index; factorization fails loudly on
// a non-positive pivot.
double diagonal_minor(const Eigen::MatrixXd& m, int removed);
double log_diagonal_minor(const Eigen::MatrixXd& m, int removed);

// Log-density split into its three factors; total is always their sum.
// For the u-marginal density the middle slot carries the cosh coupling
// energy; for the (u,s) and joint laws it carries the B-product term.
struct LogDensityReport {
  double log_prefactor = 0;
  double log_b_product = 0;
  double log_minor = 0;
  double total = 0;
};

// Density of the u-field at fixed conductances w (normalized on R^{N-1}).
LogDensityReport log_density_u(const Graph& g, const std::vector<double>& w,
                               const std::vector<double>& u, int root);

// Density of the (u,s) field with Gamma-integrated weights.
LogDensityReport log_density_us(const Graph& g, const EdgeWeights& a, const FieldConfig& f);

// Joint density of (w, u, s) including the Gamma factors on w.
LogDensityReport log_density_joint_wus(const Graph& g, const EdgeWeights& a,
                                       const std::vector<double>& w, const FieldConfig& f);

struct McmcParams {
  int64_t burnin_sweeps = 100000;
  int64_t retained_sweeps = 100000;
  int thin = 10;
  int chains = 4;
  uint64_t seed = 1;
  ExecMode mode = ExecMode::Parallel;
  double target_accept = 0.35;  // step sizes adapt here during burn-in, then freeze
  int refactor_interval = 512;  // accepted moves between full refactorizations
};

struct FieldSample {
  std::vector<double> u, s;
};

struct JointSample {
  std::vector<double> w, u, s;
};

struct ChainDiagnostics {
  double accept_u = 0, accept_s = 0, accept_w = 0;  // post burn-in rates
  double step_u = 0, step_s = 0, step_w = 0;        // frozen step sizes
  bool accept_flagged = false;                      // any rate outside [0.05, 0.95]
  std::vector<double> log_density;                  // one entry per retained sample
};

struct FieldRun {
  std::vector<std::vector<FieldSample>> chains;  // [chain][sample]
  std::vector<ChainDiagnostics> diag;
  // flattened chain-major view for estimators
  std::vector<const FieldSample*> all() const;
};

struct JointRun {
  std::vector<std::vector<JointSample>> chains;
  std::vector<ChainDiagnostics> diag;
  std::vector<const JointSample*> all() const;
};

// Metropolis sampler invariant for the (u,s) field law on g with weights a.
FieldRun sample_field_mcmc(const Graph& g, const EdgeWeights& a, int root,
                           const McmcParams& p);

// Metropolis-within-Gibbs sampler for the joint (w,u,s) law; w moves are
// multiplicative log-normal.
JointRun sample_joint_mcmc(const Graph& g, const EdgeWeights& a, int root,
                           const McmcParams& p);

// Exports: field snapshot as JSON records and chain trace as CSV.
std::string field_samples_json(const FieldConfig& f);
void write_chain_trace_csv(std::ostream& os, const ChainDiagnostics& diag, int thin);

}  // namespace errw

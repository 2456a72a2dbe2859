#include "errw/field.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "errw/report.hpp"

#include "errw/rng.hpp"

namespace errw {

EdgeWeights::EdgeWeights(std::vector<double> a) : a_(std::move(a)) {
  if (a_.empty()) throw std::invalid_argument("EdgeWeights: empty weight vector");
  min_ = a_[0];
  for (size_t e = 0; e < a_.size(); ++e) {
    if (!(a_[e] > 0) || !std::isfinite(a_[e]))
      throw std::invalid_argument("EdgeWeights: weights must be positive, edge " +
                                  std::to_string(e) + " is not");
    min_ = std::min(min_, a_[e]);
  }
}

EdgeWeights EdgeWeights::uniform(const Graph& g, double a) {
  return EdgeWeights(std::vector<double>((size_t)g.edges.size(), a));
}

FieldConfig FieldConfig::zero(int n, int root) {
  FieldConfig f;
  f.root = root;
  f.u.assign((size_t)n, 0.0);
  f.s.assign((size_t)n, 0.0);
  return f;
}

void FieldConfig::validate(int n) const {
  if ((int)u.size() != n || (int)s.size() != n)
    throw std::invalid_argument("FieldConfig: field size does not match vertex count");
  if (root < 0 || root >= n) throw std::invalid_argument("FieldConfig: root out of range");
  if (u[(size_t)root] != 0.0 || s[(size_t)root] != 0.0)
    throw std::invalid_argument("FieldConfig: root entries must be pinned to zero");
}

double b_quantity(const FieldConfig& f, int x, int y) {
  double du = f.u[(size_t)x] - f.u[(size_t)y];
  double ds = f.s[(size_t)x] - f.s[(size_t)y];
  return std::cosh(du) + 0.5 * std::exp(f.u[(size_t)x] + f.u[(size_t)y]) * ds * ds;
}

double h_energy(const Graph& g, const std::vector<double>& w, const std::vector<double>& u) {
  double h = 0;
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    h += w[e] * (std::cosh(u[(size_t)i] - u[(size_t)j]) - 1.0);
  }
  return h;
}

namespace {

Eigen::MatrixXd laplacian_from_conductances(const Graph& g, const std::vector<double>& c) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(g.n, g.n);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    m(i, i) += c[e];
    m(j, j) += c[e];
    m(i, j) -= c[e];
    m(j, i) -= c[e];
  }
  return m;
}

}  // namespace

Eigen::MatrixXd field_laplacian(const Graph& g, const std::vector<double>& w,
                                const std::vector<double>& u) {
  std::vector<double> c(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    c[e] = w[e] * std::exp(u[(size_t)i] + u[(size_t)j]);
  }
  return laplacian_from_conductances(g, c);
}

Eigen::MatrixXd mixed_laplacian(const Graph& g, const EdgeWeights& a, const FieldConfig& f) {
  std::vector<double> c(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    c[e] = a[(int)e] * std::exp(f.u[(size_t)i] + f.u[(size_t)j]) / b_quantity(f, i, j);
  }
  return laplacian_from_conductances(g, c);
}

namespace {

Eigen::MatrixXd drop_row_col(const Eigen::MatrixXd& m, int removed) {
  int n = (int)m.rows();
  Eigen::MatrixXd r(n - 1, n - 1);
  for (int i = 0, ri = 0; i < n; ++i) {
    if (i == removed) continue;
    for (int j = 0, rj = 0; j < n; ++j) {
      if (j == removed) continue;
      r(ri, rj) = m(i, j);
      ++rj;
    }
    ++ri;
  }
  return r;
}

void check_laplacian_like(const Eigen::MatrixXd& m, int removed) {
  int n = (int)m.rows();
  if (m.cols() != n) throw std::invalid_argument("diagonal_minor: matrix not square");
  if (removed < 0 || removed >= n)
    throw std::invalid_argument("diagonal_minor: removed index out of range");
  double scale = 1.0 + m.cwiseAbs().maxCoeff();
  for (int i = 0; i < n; ++i) {
    if (std::abs(m.row(i).sum()) > 1e-8 * scale * n)
      throw std::invalid_argument(
          "diagonal_minor: row sums must vanish, row " + std::to_string(i) +
          " does not; minor would depend on the removed index");
  }
}

double llt_log_determinant(const Eigen::MatrixXd& a, const char* who) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(who) +
                             ": Cholesky factorization hit a non-positive pivot");
  double ld = 0;
  auto& l = llt.matrixLLT();
  for (int i = 0; i < a.rows(); ++i) ld += std::log(l(i, i));
  return 2.0 * ld;
}

}  // namespace

double log_diagonal_minor(const Eigen::MatrixXd& m, int removed) {
  check_laplacian_like(m, removed);
  if (m.rows() == 1) return 0.0;  // empty minor is 1 by convention
  return llt_log_determinant(drop_row_col(m, removed), "log_diagonal_minor");
}

double diagonal_minor(const Eigen::MatrixXd& m, int removed) {
  return std::exp(log_diagonal_minor(m, removed));
}

LogDensityReport log_density_u(const Graph& g, const std::vector<double>& w,
                               const std::vector<double>& u, int root) {
  if ((int)u.size() != g.n) throw std::invalid_argument("log_density_u: field size mismatch");
  LogDensityReport r;
  double usum = 0;
  for (int j = 0; j < g.n; ++j)
    if (j != root) usum += u[(size_t)j];
  r.log_prefactor = -0.5 * (g.n - 1) * std::log(2.0 * std::acos(-1.0)) - usum;
  r.log_b_product = -h_energy(g, w, u);
  r.log_minor = 0.5 * log_diagonal_minor(field_laplacian(g, w, u), root);
  r.total = r.log_prefactor + r.log_b_product + r.log_minor;
  return r;
}

LogDensityReport log_density_us(const Graph& g, const EdgeWeights& a, const FieldConfig& f) {
  f.validate(g.n);
  if (a.size() != (int)g.edges.size())
    throw std::invalid_argument("log_density_us: weight count mismatch");
  LogDensityReport r;
  double usum = 0;
  for (int j = 0; j < g.n; ++j)
    if (j != f.root) usum += f.u[(size_t)j];
  r.log_prefactor = -(g.n - 1) * std::log(2.0 * std::acos(-1.0)) - usum;
  for (size_t e = 0; e < g.edges.size(); ++e) {
    auto [i, j] = g.edges[e];
    r.log_b_product -= a[(int)e] * std::log(b_quantity(f, i, j));
  }
  r.log_minor = log_diagonal_minor(mixed_laplacian(g, a, f), f.root);
  r.total = r.log_prefactor + r.log_b_product + r.log_minor;
  return r;
}

LogDensityReport log_density_joint_wus(const Graph& g, const EdgeWeights& a,
                                       const std::vector<double>& w, const FieldConfig& f) {
  f.validate(g.n);
  if (a.size() != (int)g.edges.size() || w.size() != g.edges.size())
    throw std::invalid_argument("log_density_joint_wus: weight count mismatch");
  LogDensityReport r;
  double usum = 0;
  for (int j = 0; j < g.n; ++j)
    if (j != f.root) usum += f.u[(size_t)j];
  r.log_prefactor = -(g.n - 1) * std::log(2.0 * std::acos(-1.0)) - usum;
  for (size_t e = 0; e < g.edges.size(); ++e) {
    if (!(w[e] > 0)) throw std::invalid_argument("log_density_joint_wus: w must be positive");
    r.log_prefactor += (a[(int)e] - 1.0) * std::log(w[e]) - w[e] - std::lgamma(a[(int)e]);
    auto [i, j] = g.edges[e];
    r.log_b_product -= w[e] * (b_quantity(f, i, j) - 1.0);
  }
  r.log_minor = log_diagonal_minor(field_laplacian(g, w, f.u), f.root);
  r.total = r.log_prefactor + r.log_b_product + r.log_minor;
  return r;
}

namespace {

// Reduced Laplacian bookkeeping for single-site Metropolis moves. The
// inverse and log-determinant are maintained through low-rank updates and
// refreshed by a full factorization every refactor_interval accepted moves.
struct EdgeRows {
  int i, j, ri, rj;  // endpoints and their reduced row indices (-1 for root)
};

struct MinorState {
  Eigen::MatrixXd ninv;
  double logdet = 0;
  int accepts = 0;

  void rebuild(const Graph& g, const std::vector<double>& c, int root) {
    Eigen::MatrixXd full = laplacian_from_conductances(g, c);
    Eigen::MatrixXd red = drop_row_col(full, root);
    Eigen::LLT<Eigen::MatrixXd> llt(red);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("mcmc: reduced Laplacian lost positive definiteness");
    logdet = 0;
    auto& l = llt.matrixLLT();
    for (int i = 0; i < red.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    ninv = llt.solve(Eigen::MatrixXd::Identity(red.rows(), red.cols()));
    accepts = 0;
  }
};

struct RankKTrial {
  Eigen::MatrixXd w;  // nred x k, ninv applied to the incidence columns
  Eigen::MatrixXd m;  // k x k, identity plus s * diag(dc)
  double det = 0;
  bool finite = false;
};

RankKTrial rank_k_trial(const MinorState& st, const std::vector<EdgeRows>& er,
                        const std::vector<int>& eids, const std::vector<double>& dc) {
  int k = (int)eids.size();
  int nred = (int)st.ninv.rows();
  RankKTrial t;
  t.w.setZero(nred, k);
  for (int c = 0; c < k; ++c) {
    const EdgeRows& e = er[(size_t)eids[(size_t)c]];
    if (e.ri >= 0) t.w.col(c) += st.ninv.col(e.ri);
    if (e.rj >= 0) t.w.col(c) -= st.ninv.col(e.rj);
  }
  Eigen::MatrixXd s(k, k);
  for (int r = 0; r < k; ++r) {
    const EdgeRows& e = er[(size_t)eids[(size_t)r]];
    for (int c = 0; c < k; ++c) {
      double v = 0;
      if (e.ri >= 0) v += t.w(e.ri, c);
      if (e.rj >= 0) v -= t.w(e.rj, c);
      s(r, c) = v;
    }
  }
  t.m = Eigen::MatrixXd::Identity(k, k);
  for (int c = 0; c < k; ++c) t.m.col(c) += s.col(c) * dc[(size_t)c];
  t.det = t.m.partialPivLu().determinant();
  t.finite = std::isfinite(t.det);
  return t;
}

void apply_rank_k(MinorState& st, const RankKTrial& t, const std::vector<double>& dc) {
  int k = (int)t.m.rows();
  Eigen::MatrixXd kk = t.m.partialPivLu().solve(Eigen::MatrixXd::Identity(k, k));
  for (int r = 0; r < k; ++r) kk.row(r) *= dc[(size_t)r];
  kk = 0.5 * (kk + kk.transpose()).eval();  // symmetric in exact arithmetic
  st.ninv.noalias() -= t.w * kk * t.w.transpose();
  st.logdet += std::log(t.det);
  ++st.accepts;
}

struct MoveFamily {
  double step = 0.5;
  int64_t proposed = 0, accepted = 0;      // current adaptation window
  int64_t kept_prop = 0, kept_acc = 0;     // post burn-in totals

  void adapt(double target) {
    if (proposed == 0) return;
    double rate = (double)accepted / (double)proposed;
    step *= std::exp(0.66 * (rate - target));
    step = std::min(10.0, std::max(1e-3, step));
    proposed = accepted = 0;
  }
  double rate() const {
    return kept_prop == 0 ? 0.0 : (double)kept_acc / (double)kept_prop;
  }
};

constexpr int kAdaptWindow = 100;  // sweeps between step-size adjustments

void validate_params(const McmcParams& p) {
  if (p.burnin_sweeps < 0 || p.retained_sweeps <= 0)
    throw std::invalid_argument("mcmc: sweep counts must be positive");
  if (p.thin < 1 || p.chains < 1 || p.refactor_interval < 1)
    throw std::invalid_argument("mcmc: thin, chains, refactor_interval must be >= 1");
  if (p.retained_sweeps < p.thin)
    throw std::invalid_argument("mcmc: retained sweeps shorter than thinning stride");
}

std::vector<EdgeRows> edge_rows(const Graph& g, int root) {
  std::vector<EdgeRows> er;
  er.reserve(g.edges.size());
  for (auto [i, j] : g.edges) {
    auto red = [root](int v) { return v == root ? -1 : (v < root ? v : v - 1); };
    er.push_back({i, j, red(i), red(j)});
  }
  return er;
}

}  // namespace

std::vector<const FieldSample*> FieldRun::all() const {
  std::vector<const FieldSample*> v;
  for (const auto& ch : chains)
    for (const auto& s : ch) v.push_back(&s);
  return v;
}

std::vector<const JointSample*> JointRun::all() const {
  std::vector<const JointSample*> v;
  for (const auto& ch : chains)
    for (const auto& s : ch) v.push_back(&s);
  return v;
}

FieldRun sample_field_mcmc(const Graph& g, const EdgeWeights& a, int root,
                           const McmcParams& p) {
  validate_params(p);
  if (root < 0 || root >= g.n) throw std::invalid_argument("mcmc: root out of range");
  if (a.size() != (int)g.edges.size()) throw std::invalid_argument("mcmc: weight count mismatch");
  if (!g.connected()) throw std::invalid_argument("mcmc: graph must be connected");

  FieldRun run;
  run.chains.resize((size_t)p.chains);
  run.diag.resize((size_t)p.chains);

  run_indexed(p.chains, p.mode, [&](int chain) {
    Rng rng(p.seed, (uint64_t)chain);
    FieldConfig f = FieldConfig::zero(g.n, root);
    std::vector<EdgeRows> er = edge_rows(g, root);
    size_t ne = g.edges.size();
    std::vector<double> bcur(ne), c(ne);
    for (size_t e = 0; e < ne; ++e) {
      auto [i, j] = g.edges[e];
      bcur[e] = b_quantity(f, i, j);
      c[e] = a[(int)e] * std::exp(f.u[(size_t)i] + f.u[(size_t)j]) / bcur[e];
    }
    MinorState minor;
    minor.rebuild(g, c, root);

    MoveFamily fam_u, fam_s;
    bool frozen = false;
    int64_t retained_target = p.retained_sweeps / p.thin;
    auto& samples = run.chains[(size_t)chain];
    samples.reserve((size_t)retained_target);
    auto& diag = run.diag[(size_t)chain];

    // one single-site Metropolis proposal; which == 0 moves u, 1 moves s
    auto site_move = [&](int v, int which) {
      MoveFamily& fam = which == 0 ? fam_u : fam_s;
      double zeta = rng.normal();
      double uacc = rng.uniform_pos();
      fam.proposed++;
      if (frozen) fam.kept_prop++;
      double delta = fam.step * zeta;
      double old = which == 0 ? f.u[(size_t)v] : f.s[(size_t)v];
      double cand = old + delta;

      const auto& nbrs = g.adj[(size_t)v];
      std::vector<int> eids;
      std::vector<double> bnew(nbrs.size()), cnew(nbrs.size()), dc(nbrs.size());
      double log_ratio = which == 0 ? -delta : 0.0;
      bool bad = false;
      for (size_t t = 0; t < nbrs.size(); ++t) {
        auto [nb, e] = nbrs[t];
        eids.push_back(e);
        double ui = which == 0 ? cand : f.u[(size_t)v];
        double si = which == 0 ? f.s[(size_t)v] : cand;
        double du = ui - f.u[(size_t)nb];
        double ds = si - f.s[(size_t)nb];
        double esum = std::exp(ui + f.u[(size_t)nb]);
        bnew[t] = std::cosh(du) + 0.5 * esum * ds * ds;
        cnew[t] = a[eids[t]] * esum / bnew[t];
        dc[t] = cnew[t] - c[(size_t)eids[t]];
        if (!std::isfinite(bnew[t]) || !std::isfinite(cnew[t])) bad = true;
        log_ratio -= a[eids[t]] * (std::log(bnew[t]) - std::log(bcur[(size_t)eids[t]]));
      }
      if (bad || !std::isfinite(log_ratio)) return;

      RankKTrial trial = rank_k_trial(minor, er, eids, dc);
      bool full_path = !trial.finite || trial.det <= 1e-12;
      double det_term;
      std::vector<double> ccand;
      if (full_path) {
        // cancellation spoiled the low-rank ratio: fall back to a fresh
        // factorization of the candidate conductances
        ccand = c;
        for (size_t t = 0; t < eids.size(); ++t) ccand[(size_t)eids[(size_t)t]] = cnew[t];
        Eigen::MatrixXd red = drop_row_col(laplacian_from_conductances(g, ccand), root);
        Eigen::LLT<Eigen::MatrixXd> llt(red);
        if (llt.info() != Eigen::Success) return;  // candidate degenerate, reject
        double ld = 0;
        auto& l = llt.matrixLLT();
        for (int i = 0; i < red.rows(); ++i) ld += 2.0 * std::log(l(i, i));
        det_term = ld - minor.logdet;
      } else {
        det_term = std::log(trial.det);
      }
      log_ratio += det_term;
      if (!(std::log(uacc) < log_ratio)) return;

      if (which == 0)
        f.u[(size_t)v] = cand;
      else
        f.s[(size_t)v] = cand;
      for (size_t t = 0; t < eids.size(); ++t) {
        bcur[(size_t)eids[t]] = bnew[t];
        c[(size_t)eids[t]] = cnew[t];
      }
      if (full_path)
        minor.rebuild(g, c, root);
      else
        apply_rank_k(minor, trial, dc);
      if (minor.accepts >= p.refactor_interval) minor.rebuild(g, c, root);
      fam.accepted++;
      if (frozen) fam.kept_acc++;
    };

    int64_t total = p.burnin_sweeps + p.retained_sweeps;
    for (int64_t sweep = 1; sweep <= total; ++sweep) {
      if (!frozen && sweep > p.burnin_sweeps) {
        frozen = true;
        diag.step_u = fam_u.step;
        diag.step_s = fam_s.step;
      }
      for (int v = 0; v < g.n; ++v)
        if (v != root) site_move(v, 0);
      for (int v = 0; v < g.n; ++v)
        if (v != root) site_move(v, 1);
      if (!frozen && sweep % kAdaptWindow == 0) {
        fam_u.adapt(p.target_accept);
        fam_s.adapt(p.target_accept);
      }
      if (frozen) {
        int64_t post = sweep - p.burnin_sweeps;
        if (post % p.thin == 0 && (int64_t)samples.size() < retained_target) {
          samples.push_back({f.u, f.s});
          diag.log_density.push_back(log_density_us(g, a, f).total);
        }
      }
    }
    diag.accept_u = fam_u.rate();
    diag.accept_s = fam_s.rate();
    diag.accept_flagged = diag.accept_u < 0.05 || diag.accept_u > 0.95 ||
                          diag.accept_s < 0.05 || diag.accept_s > 0.95;
  });
  return run;
}

JointRun sample_joint_mcmc(const Graph& g, const EdgeWeights& a, int root,
                           const McmcParams& p) {
  validate_params(p);
  if (root < 0 || root >= g.n) throw std::invalid_argument("mcmc: root out of range");
  if (a.size() != (int)g.edges.size()) throw std::invalid_argument("mcmc: weight count mismatch");
  if (!g.connected()) throw std::invalid_argument("mcmc: graph must be connected");

  JointRun run;
  run.chains.resize((size_t)p.chains);
  run.diag.resize((size_t)p.chains);

  run_indexed(p.chains, p.mode, [&](int chain) {
    Rng rng(p.seed, (uint64_t)chain);
    FieldConfig f = FieldConfig::zero(g.n, root);
    std::vector<EdgeRows> er = edge_rows(g, root);
    size_t ne = g.edges.size();
    std::vector<double> w(ne), bcur(ne), c(ne);
    for (size_t e = 0; e < ne; ++e) {
      auto [i, j] = g.edges[e];
      w[e] = a[(int)e];
      bcur[e] = b_quantity(f, i, j);
      c[e] = w[e] * std::exp(f.u[(size_t)i] + f.u[(size_t)j]);
    }
    MinorState minor;
    minor.rebuild(g, c, root);

    MoveFamily fam_u, fam_s, fam_w;
    bool frozen = false;
    int64_t retained_target = p.retained_sweeps / p.thin;
    auto& samples = run.chains[(size_t)chain];
    samples.reserve((size_t)retained_target);
    auto& diag = run.diag[(size_t)chain];

    auto rebuild_if_due = [&] {
      if (minor.accepts >= p.refactor_interval) minor.rebuild(g, c, root);
    };

    auto u_move = [&](int v) {
      double zeta = rng.normal();
      double uacc = rng.uniform_pos();
      fam_u.proposed++;
      if (frozen) fam_u.kept_prop++;
      double delta = fam_u.step * zeta;
      double cand = f.u[(size_t)v] + delta;
      const auto& nbrs = g.adj[(size_t)v];
      std::vector<int> eids;
      std::vector<double> bnew(nbrs.size()), cnew(nbrs.size()), dc(nbrs.size());
      double log_ratio = -delta;
      bool bad = false;
      for (size_t t = 0; t < nbrs.size(); ++t) {
        auto [nb, e] = nbrs[t];
        eids.push_back(e);
        double du = cand - f.u[(size_t)nb];
        double ds = f.s[(size_t)v] - f.s[(size_t)nb];
        double esum = std::exp(cand + f.u[(size_t)nb]);
        bnew[t] = std::cosh(du) + 0.5 * esum * ds * ds;
        cnew[t] = w[(size_t)e] * esum;
        dc[t] = cnew[t] - c[(size_t)e];
        if (!std::isfinite(bnew[t]) || !std::isfinite(cnew[t])) bad = true;
        log_ratio -= w[(size_t)e] * (bnew[t] - bcur[(size_t)e]);
      }
      if (bad || !std::isfinite(log_ratio)) return;
      RankKTrial trial = rank_k_trial(minor, er, eids, dc);
      bool full_path = !trial.finite || trial.det <= 1e-12;
      double det_term;
      if (full_path) {
        std::vector<double> ccand = c;
        for (size_t t = 0; t < eids.size(); ++t) ccand[(size_t)eids[(size_t)t]] = cnew[t];
        Eigen::MatrixXd red = drop_row_col(laplacian_from_conductances(g, ccand), root);
        Eigen::LLT<Eigen::MatrixXd> llt(red);
        if (llt.info() != Eigen::Success) return;
        double ld = 0;
        auto& l = llt.matrixLLT();
        for (int i = 0; i < red.rows(); ++i) ld += 2.0 * std::log(l(i, i));
        det_term = ld - minor.logdet;
      } else {
        det_term = std::log(trial.det);
      }
      log_ratio += det_term;
      if (!(std::log(uacc) < log_ratio)) return;
      f.u[(size_t)v] = cand;
      for (size_t t = 0; t < eids.size(); ++t) {
        bcur[(size_t)eids[t]] = bnew[t];
        c[(size_t)eids[t]] = cnew[t];
      }
      if (full_path)
        minor.rebuild(g, c, root);
      else
        apply_rank_k(minor, trial, dc);
      rebuild_if_due();
      fam_u.accepted++;
      if (frozen) fam_u.kept_acc++;
    };

    // s only enters through the local coupling term, never the determinant
    auto s_move = [&](int v) {
      double zeta = rng.normal();
      double uacc = rng.uniform_pos();
      fam_s.proposed++;
      if (frozen) fam_s.kept_prop++;
      double cand = f.s[(size_t)v] + fam_s.step * zeta;
      const auto& nbrs = g.adj[(size_t)v];
      std::vector<double> bnew(nbrs.size());
      double log_ratio = 0;
      bool bad = false;
      for (size_t t = 0; t < nbrs.size(); ++t) {
        auto [nb, e] = nbrs[t];
        double du = f.u[(size_t)v] - f.u[(size_t)nb];
        double ds = cand - f.s[(size_t)nb];
        bnew[t] = std::cosh(du) +
                  0.5 * std::exp(f.u[(size_t)v] + f.u[(size_t)nb]) * ds * ds;
        if (!std::isfinite(bnew[t])) bad = true;
        log_ratio -= w[(size_t)e] * (bnew[t] - bcur[(size_t)e]);
      }
      if (bad || !std::isfinite(log_ratio)) return;
      if (!(std::log(uacc) < log_ratio)) return;
      f.s[(size_t)v] = cand;
      for (size_t t = 0; t < nbrs.size(); ++t) bcur[(size_t)nbrs[t].second] = bnew[t];
      fam_s.accepted++;
      if (frozen) fam_s.kept_acc++;
    };

    // multiplicative log-normal proposal; the log(w'/w) Jacobian folds into
    // the Gamma factor to give a_e * dlog(w) - dw * B_e
    auto w_move = [&](int e) {
      double zeta = rng.normal();
      double uacc = rng.uniform_pos();
      fam_w.proposed++;
      if (frozen) fam_w.kept_prop++;
      double wold = w[(size_t)e];
      double wnew = wold * std::exp(fam_w.step * zeta);
      if (!(wnew > 0) || !std::isfinite(wnew)) return;
      auto [i, j] = g.edges[(size_t)e];
      double cnew = wnew * std::exp(f.u[(size_t)i] + f.u[(size_t)j]);
      double log_ratio = a[e] * (std::log(wnew) - std::log(wold)) -
                         (wnew - wold) * bcur[(size_t)e];
      if (!std::isfinite(log_ratio) || !std::isfinite(cnew)) return;
      std::vector<int> eids = {e};
      std::vector<double> dc = {cnew - c[(size_t)e]};
      RankKTrial trial = rank_k_trial(minor, er, eids, dc);
      bool full_path = !trial.finite || trial.det <= 1e-12;
      double det_term;
      if (full_path) {
        std::vector<double> ccand = c;
        ccand[(size_t)e] = cnew;
        Eigen::MatrixXd red = drop_row_col(laplacian_from_conductances(g, ccand), root);
        Eigen::LLT<Eigen::MatrixXd> llt(red);
        if (llt.info() != Eigen::Success) return;
        double ld = 0;
        auto& l = llt.matrixLLT();
        for (int i2 = 0; i2 < red.rows(); ++i2) ld += 2.0 * std::log(l(i2, i2));
        det_term = ld - minor.logdet;
      } else {
        det_term = std::log(trial.det);
      }
      log_ratio += det_term;
      if (!(std::log(uacc) < log_ratio)) return;
      w[(size_t)e] = wnew;
      c[(size_t)e] = cnew;
      if (full_path)
        minor.rebuild(g, c, root);
      else
        apply_rank_k(minor, trial, dc);
      rebuild_if_due();
      fam_w.accepted++;
      if (frozen) fam_w.kept_acc++;
    };

    int64_t total = p.burnin_sweeps + p.retained_sweeps;
    for (int64_t sweep = 1; sweep <= total; ++sweep) {
      if (!frozen && sweep > p.burnin_sweeps) {
        frozen = true;
        diag.step_u = fam_u.step;
        diag.step_s = fam_s.step;
        diag.step_w = fam_w.step;
      }
      for (int v = 0; v < g.n; ++v)
        if (v != root) u_move(v);
      for (int v = 0; v < g.n; ++v)
        if (v != root) s_move(v);
      for (int e = 0; e < (int)ne; ++e) w_move(e);
      if (!frozen && sweep % kAdaptWindow == 0) {
        fam_u.adapt(p.target_accept);
        fam_s.adapt(p.target_accept);
        fam_w.adapt(p.target_accept);
      }
      if (frozen) {
        int64_t post = sweep - p.burnin_sweeps;
        if (post % p.thin == 0 && (int64_t)samples.size() < retained_target) {
          samples.push_back({w, f.u, f.s});
          diag.log_density.push_back(log_density_joint_wus(g, a, w, f).total);
        }
      }
    }
    diag.accept_u = fam_u.rate();
    diag.accept_s = fam_s.rate();
    diag.accept_w = fam_w.rate();
    diag.accept_flagged = diag.accept_u < 0.05 || diag.accept_u > 0.95 ||
                          diag.accept_s < 0.05 || diag.accept_s > 0.95 ||
                          diag.accept_w < 0.05 || diag.accept_w > 0.95;
  });
  return run;
}

std::string field_samples_json(const FieldConfig& f) {
  nlohmann::json j;
  j["root"] = f.root;
  j["u"] = f.u;
  j["s"] = f.s;
  return j.dump();
}

void write_chain_trace_csv(std::ostream& os, const ChainDiagnostics& diag, int thin) {
  os << "sample,sweep,log_density\n";
  for (size_t i = 0; i < diag.log_density.size(); ++i)
    os << i << ',' << (i + 1) * (size_t)thin << ',' << fmt_double(diag.log_density[i]) << '\n';
}

}  // namespace errw

#include "errw/walkers.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "errw/report.hpp"

namespace errw {

ErrwState errw_start(const Graph& g, const EdgeWeights& a, int start) {
  if (start < 0 || start >= g.n) throw std::invalid_argument("errw_start: start out of range");
  if (a.size() != (int)g.edges.size())
    throw std::invalid_argument("errw_start: weight count mismatch");
  ErrwState st;
  st.g = &g;
  st.z = a.values();
  st.position = start;
  return st;
}

int errw_step(ErrwState& st, Rng& rng) {
  const auto& nbrs = st.g->adj[(size_t)st.position];
  if (nbrs.empty()) throw std::runtime_error("errw_step: walk stuck at isolated vertex");
  std::vector<double> w(nbrs.size());
  for (size_t k = 0; k < nbrs.size(); ++k) w[k] = st.z[(size_t)nbrs[k].second];
  int pick = rng.categorical(w.data(), (int)w.size());
  st.z[(size_t)nbrs[(size_t)pick].second] += 1.0;
  st.position = nbrs[(size_t)pick].first;
  st.steps++;
  return st.position;
}

double errw_path_probability(const Graph& g, const EdgeWeights& a,
                             const std::vector<int>& path) {
  if (path.size() < 2) return 1.0;
  std::vector<double> z = a.values();
  double prob = 1.0;
  for (size_t k = 0; k + 1 < path.size(); ++k) {
    int v = path[k], next = path[k + 1];
    int e = g.edge_between(v, next);
    if (e < 0)
      throw std::invalid_argument("errw_path_probability: consecutive vertices not adjacent");
    double total = 0;
    for (auto [nb, eid] : g.adj[(size_t)v]) {
      (void)nb;
      total += z[(size_t)eid];
    }
    prob *= z[(size_t)e] / total;
    z[(size_t)e] += 1.0;
  }
  return prob;
}

VrjpState vrjp_start(const Graph& g, int start) {
  if (start < 0 || start >= g.n) throw std::invalid_argument("vrjp_start: start out of range");
  VrjpState st;
  st.g = &g;
  st.local_time.assign((size_t)g.n, 1.0);
  st.position = start;
  return st;
}

int vrjp_step(VrjpState& st, const std::vector<double>& w, Rng& rng, double* holding) {
  if (w.size() != st.g->edges.size())
    throw std::invalid_argument("vrjp_step: weight count mismatch");
  const auto& nbrs = st.g->adj[(size_t)st.position];
  if (nbrs.empty()) throw std::runtime_error("vrjp_step: walk stuck at isolated vertex");
  std::vector<double> rates(nbrs.size());
  double total = 0;
  for (size_t k = 0; k < nbrs.size(); ++k) {
    rates[k] = w[(size_t)nbrs[k].second] * st.local_time[(size_t)nbrs[k].first];
    total += rates[k];
  }
  // the rates only involve neighbor local times, which are frozen during the
  // sojourn, so the waiting time is exponential at the total rate
  double tau = rng.exponential(total);
  int pick = rng.categorical(rates.data(), (int)rates.size());
  st.local_time[(size_t)st.position] += tau;
  st.time += tau;
  st.position = nbrs[(size_t)pick].first;
  st.jumps++;
  if (holding) *holding = tau;
  return st.position;
}

Trajectory vrjp_run(const Graph& g, const std::vector<double>& w, int start,
                    int64_t jump_count, Rng& rng) {
  VrjpState st = vrjp_start(g, start);
  Trajectory t;
  t.vertices.reserve((size_t)jump_count + 1);
  t.holding.reserve((size_t)jump_count);
  t.vertices.push_back(start);
  for (int64_t k = 0; k < jump_count; ++k) {
    double tau = 0;
    int v = vrjp_step(st, w, rng, &tau);
    t.vertices.push_back(v);
    t.holding.push_back(tau);
  }
  return t;
}

std::vector<int> gamma_mixture_errw_path(const Graph& g, const EdgeWeights& a, int start,
                                         int steps, Rng& rng) {
  std::vector<double> w(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) w[e] = rng.gamma(a[(int)e]);
  Trajectory t = vrjp_run(g, w, start, steps, rng);
  return t.vertices;
}

Trajectory time_change(const Graph& g, int start, const Trajectory& t) {
  if (t.vertices.empty() || t.vertices[0] != start)
    throw std::invalid_argument("time_change: trajectory must begin at the start vertex");
  if (t.holding.size() + 1 != t.vertices.size())
    throw std::invalid_argument("time_change: holding count must be jumps");
  std::vector<double> local((size_t)g.n, 1.0);
  Trajectory out;
  out.vertices = t.vertices;
  out.holding.reserve(t.holding.size());
  for (size_t k = 0; k < t.holding.size(); ++k) {
    int v = t.vertices[k];
    double l = local[(size_t)v];
    double tau = t.holding[k];
    out.holding.push_back(2.0 * l * tau + tau * tau);  // (l+tau)^2 - l^2
    local[(size_t)v] = l + tau;
  }
  return out;
}

std::vector<double> estimate_u_field(const Graph& g, const std::vector<double>& w,
                                     int root, double horizon, Rng& rng) {
  if (root < 0 || root >= g.n) throw std::invalid_argument("estimate_u_field: root out of range");
  if (!(horizon > 0)) throw std::invalid_argument("estimate_u_field: horizon must be positive");
  if (w.size() != g.edges.size())
    throw std::invalid_argument("estimate_u_field: weight count mismatch");
  VrjpState st = vrjp_start(g, root);
  for (;;) {
    const auto& nbrs = g.adj[(size_t)st.position];
    std::vector<double> rates(nbrs.size());
    double total = 0;
    for (size_t k = 0; k < nbrs.size(); ++k) {
      rates[k] = w[(size_t)nbrs[k].second] * st.local_time[(size_t)nbrs[k].first];
      total += rates[k];
    }
    double tau = rng.exponential(total);
    if (st.time + tau >= horizon) {
      st.local_time[(size_t)st.position] += horizon - st.time;
      st.time = horizon;
      break;
    }
    int pick = rng.categorical(rates.data(), (int)rates.size());
    st.local_time[(size_t)st.position] += tau;
    st.time += tau;
    st.position = nbrs[(size_t)pick].first;
    st.jumps++;
  }
  std::vector<double> u((size_t)g.n);
  double base = std::log(st.local_time[(size_t)root]);
  for (int i = 0; i < g.n; ++i) u[(size_t)i] = std::log(st.local_time[(size_t)i]) - base;
  return u;
}

EscapeResult escape_probability_experiment(int dim, int radius, double a_uniform,
                                           int64_t runs, uint64_t seed, int64_t step_cap,
                                           ExecMode mode) {
  if (runs < 1) throw std::invalid_argument("escape experiment: runs must be >= 1");
  if (radius < 1) throw std::invalid_argument("escape experiment: radius must be >= 1");
  LatticeBox box(dim, radius);
  Graph g = box.graph();
  EdgeWeights a = EdgeWeights::uniform(g, a_uniform);
  int center = box.center_index();
  std::vector<int> bd = box.boundary_indices();
  std::vector<char> is_boundary((size_t)g.n, 0);
  for (int v : bd) is_boundary[(size_t)v] = 1;

  std::atomic<int64_t> escapes{0}, censored{0};
  run_indexed((int)runs, mode, [&](int run) {
    Rng rng(seed, (uint64_t)run);
    ErrwState st = errw_start(g, a, center);
    for (int64_t step = 0; step < step_cap; ++step) {
      int v = errw_step(st, rng);
      if (is_boundary[(size_t)v]) {
        escapes.fetch_add(1, std::memory_order_relaxed);
        return;
      }
      if (v == center) return;  // returned before reaching the shell
    }
    censored.fetch_add(1, std::memory_order_relaxed);
  });

  EscapeResult r;
  r.runs = runs;
  r.censored = censored.load();
  r.estimate = (double)escapes.load() / (double)runs;
  r.se = std::sqrt(std::max(0.0, r.estimate * (1.0 - r.estimate)) / (double)runs);
  return r;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "step,vertex,holding_time\n";
  for (size_t k = 0; k < t.vertices.size(); ++k) {
    double h = t.holding.empty() ? 1.0 : (k < t.holding.size() ? t.holding[k] : 0.0);
    os << k << ',' << t.vertices[k] << ',' << fmt_double(h) << '\n';
  }
}

std::string escape_result_json(const EscapeResult& r) {
  nlohmann::json j;
  j["estimate"] = r.estimate;
  j["se"] = r.se;
  j["runs"] = r.runs;
  j["censored"] = r.censored;
  return j.dump();
}

}  // namespace errw

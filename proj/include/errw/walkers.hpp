#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "errw/field.hpp"
#include "errw/geometry.hpp"
#include "errw/parallel.hpp"
#include "errw/rng.hpp"

namespace errw {

// Edge-reinforced walk state: z_e = a_e + number of crossings of e so far.
struct ErrwState {
  const Graph* g = nullptr;
  std::vector<double> z;
  int position = 0;
  int64_t steps = 0;
};

ErrwState errw_start(const Graph& g, const EdgeWeights& a, int start);
int errw_step(ErrwState& st, Rng& rng);

// Exact probability of a vertex path under the reinforced law (the oracle
// the samplers are checked against). Throws on non-adjacent consecutive
// vertices.
double errw_path_probability(const Graph& g, const EdgeWeights& a,
                             const std::vector<int>& path);

// Linearly reinforced jump process: local time L_j = 1 + time spent at j;
// jump rate to a neighbor j is w_ij L_j. While sitting at i the outgoing
// rates are constant (L_i does not enter them), so the sojourn is
// exponential.
struct VrjpState {
  const Graph* g = nullptr;
  std::vector<double> local_time;  // L_j
  int position = 0;
  double time = 0;
  int64_t jumps = 0;
};

VrjpState vrjp_start(const Graph& g, int start);
// Advances one jump; returns the new vertex and stores the sojourn length.
int vrjp_step(VrjpState& st, const std::vector<double>& w, Rng& rng, double* holding);

struct Trajectory {
  std::vector<int> vertices;      // visited vertices, starting state first
  std::vector<double> holding;    // sojourn at vertices[k] before the k-th jump
};

Trajectory vrjp_run(const Graph& g, const std::vector<double>& w, int start,
                    int64_t jump_count, Rng& rng);

// Discrete skeleton of the jump process with independent Gamma(a_e, 1)
// conductances: equal in law to the reinforced walk.
std::vector<int> gamma_mixture_errw_path(const Graph& g, const EdgeWeights& a, int start,
                                         int steps, Rng& rng);

// Time change C(s) = sum_i (L_i(s)^2 - 1): same vertex sequence, sojourns
// rewritten in the new clock (sitting at the start for s gives C = s^2+2s).
Trajectory time_change(const Graph& g, int start, const Trajectory& t);

// log L_i(T) - log L_root(T) after running the jump process to time T.
std::vector<double> estimate_u_field(const Graph& g, const std::vector<double>& w,
                                     int root, double horizon, Rng& rng);

struct EscapeResult {
  double estimate = 0;   // fraction of runs reaching the boundary before returning
  double se = 0;
  int64_t runs = 0;
  int64_t censored = 0;  // step-capped runs, counted as non-escapes
};

EscapeResult escape_probability_experiment(int dim, int radius, double a_uniform,
                                           int64_t runs, uint64_t seed,
                                           int64_t step_cap = 10000000,
                                           ExecMode mode = ExecMode::Parallel);

// CSV export: header "step,vertex,holding_time" (holding 1 for discrete walks).
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
std::string escape_result_json(const EscapeResult& r);

}  // namespace errw

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errw/field.hpp"
#include "errw/geometry.hpp"
#include "errw/network.hpp"
#include "errw/stats.hpp"

namespace errw {

// One Monte Carlo check against an exact target or bound.
struct WardReport {
  std::string name;
  double estimate = 0;
  double se = 0;
  double target = 0;     // exact value, or upper bound when is_bound
  bool is_bound = false;
  double z = 0;          // distance to target (or overshoot) in se units
  std::string verdict;   // pass | marginal | suspicious
  int64_t samples = 0;
  double ess = 0;
};

WardReport make_report(const std::string& name, const McEstimate& e, double target,
                       bool is_bound);

// <B_xy^m (1 - m D_xy)> = 1, with D_xy the effective resistance of the
// full-graph network with the doubly-tilted conductances. Requires
// m <= min(a)/4.
WardReport ward_identity_estimate(const Graph& g, const EdgeWeights& a, int root, int x,
                                  int y, double m, const McmcParams& p,
                                  const FieldRun* reuse = nullptr);

// Closed-form companion on a single edge: <B^m> = (1 - m/a)^{-1}.
WardReport single_edge_b_moment(const EdgeWeights& a, double m, const McmcParams& p);

// Region for protected estimates: an apex pair plus the member vertices
// (graph vertex ids). Edges internal to the region define its free-boundary
// network.
struct WardRegion {
  int x = 0, y = 0;
  std::vector<int> vertices;
};

struct ProtectedReports {
  WardReport plain;      // <prod B^m (1 - m D^N)> <= 1
  WardReport gated;      // same with the chi-bar gates            <= 1
  WardReport moments;    // <prod B^m chi-bar> <= prod (1 - m C_emp/a)^{-1}
  double c_empirical = 0;  // max over gated samples of a * D^N
};

// Regions must be pairwise vertex-disjoint (the conservative reading of
// interior-disjoint); violations throw. For single-edge regions the
// free-boundary resistance is 1/a_xy and every gate is trivially open.
ProtectedReports protected_ward_estimate(const Graph& g, const EdgeWeights& a, int root,
                                         const std::vector<WardRegion>& regions,
                                         const std::vector<double>& m,
                                         const ChiParams& cp, const McmcParams& p);

// <prod_j B_{e_j}^{m_j}> <= 2^n for m_j <= min(a)/2.
WardReport moment_bound_estimate(const Graph& g, const EdgeWeights& a, int root,
                                 const std::vector<int>& edge_ids,
                                 const std::vector<double>& m, const McmcParams& p);

// <cosh^m(U_x - U_y)> for each listed pair, reported against the bound 2.
std::vector<WardReport> fluctuation_estimate(const Graph& g, const EdgeWeights& a,
                                             int root,
                                             const std::vector<std::pair<int, int>>& pairs,
                                             double m, const McmcParams& p,
                                             const FieldRun* reuse = nullptr);

// Scale-n goodness: x is n-good when B_xy <= b|x-y|^alpha for every y in the
// box with 1 <= |x-y| <= 4^n.
bool is_n_good(const LatticeBox& box, const FieldConfig& f, const Point& x, int n,
               const ChiParams& cp);

// Pointwise decomposition check: [no n-good point in the cube around center]
// <= sum over admissible subcube trees of the product over leaves of the
// dominated bad-pair sums S^c (distance bands (4^{n-k-1}, 4^{n-k}]).
struct GoodPointReport {
  bool no_good_point = false;  // left side
  double rhs = 0;
  long long tree_count = 0;
  bool holds = false;
};

GoodPointReport good_point_check(const LatticeBox& box, const FieldConfig& f,
                                 const ChiParams& cp, int n, double m_exp,
                                 const Point& center);

// Bottom-up evaluation of the tree sum (no enumeration); equals the
// enumerated sum, which the tests cross-check for n <= 2.
double good_point_rhs(const LatticeBox& box, const FieldConfig& f, const ChiParams& cp,
                      const SubcubeTree& tree, double m_exp);

// Escape-probability pipeline on the box: E[W_0^U R(0, boundary)] under the
// joint law, against the unit-conductance resistance. The Jensen direction
// 1/E[P] <= E[1/P] is asserted on the sampled batch.
struct PipelineReport {
  double mean_w_r = 0;         // E[W_0^U R(0,boundary; W^U)]
  double se = 0;
  double unit_resistance = 0;  // R(0,boundary) with unit conductances
  double ratio = 0;            // mean_w_r / unit_resistance
  double mean_p = 0;           // E[P_0(hit boundary before return)]
  bool jensen_ok = false;
  int64_t samples = 0;
};

PipelineReport transience_pipeline_check(int dim, int radius, double a_uniform,
                                         const McmcParams& p);

// Deterministic degenerate case (w constant, u = s = 0):
// E[W_0 R] = 2d * R(0,boundary) exactly.
double pipeline_constant_case(int dim, int radius, double w_const);

}  // namespace errw

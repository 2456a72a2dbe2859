#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "errw/field.hpp"
#include "errw/geometry.hpp"

namespace errw {

// Finite electrical network: positive edge conductances on a connected graph
// with a distinguished grounding vertex for reduced solves.
struct ConductanceNetwork {
  Graph g;
  std::vector<double> c;
  int root = 0;

  void validate() const;  // sizes, positivity (names the offending edge), connectivity
  std::vector<double> vertex_strength() const;  // c_i = sum of incident conductances
};

Eigen::MatrixXd laplacian(const ConductanceNetwork& net);

// Green's matrix grounded at net.root: inverse of the root-reduced Laplacian
// padded with a zero row/column at the root. Solves are refined until the
// residual drops below 1e-10.
Eigen::MatrixXd greens_matrix(const ConductanceNetwork& net);

// Effective resistance between x and y; independent of net.root.
double effective_resistance(const ConductanceNetwork& net, int x, int y);

// Network with the target set glued into one vertex (parallel conductances
// add). glued_id receives the id of the merged vertex.
ConductanceNetwork contract(const ConductanceNetwork& net, const std::vector<int>& glue,
                            int* glued_id);

double effective_resistance_to_set(const ConductanceNetwork& net, int x,
                                   const std::vector<int>& targets);

// P_x(hit targets before returning to x) for the walk with jump weights c.
double hitting_probability(const ConductanceNetwork& net, int x,
                           const std::vector<int>& targets);

// Doubly-tilted conductances c^{xy}_ij = a_ij e^{u_i+u_j-u_x-u_y} B_xy / B_ij
// on the edges of g.
std::vector<double> xy_conductances(const Graph& g, const EdgeWeights& a,
                                    const FieldConfig& f, int x, int y);

// Effective resistance between the apexes using only edges internal to the
// diamond (free boundary): plain effective resistance of the restricted net.
double neumann_resistance(const Diamond& d, const std::vector<double>& c_on_diamond_edges);

// Unit flow from x to y on the edges of a graph, stored on each edge's
// first->second orientation.
struct UnitFlow {
  int x = 0, y = 0;
  std::vector<double> theta;
};

std::vector<double> divergence(const Graph& g, const UnitFlow& f);

// Harmonic (minimum-energy) unit flow; its energy equals the effective
// resistance.
UnitFlow min_energy_flow(const ConductanceNetwork& net, int x, int y);

// Sum over undirected edges of theta(e)^2 / c_e.
double flow_energy(const ConductanceNetwork& net, const UnitFlow& f);

struct ChiParams {
  double b = 2.0;
  double alpha = 0.125;
  // Hard range checks; the resistance bound additionally requires
  // alpha <= 1/8.
  void validate(bool for_resistance_bound) const;
};

// chi_xy = [B_xy <= b |x-y|^alpha]; the coincident factor is defined true.
bool chi_indicator(const FieldConfig& f, const Point& px, const Point& py, int ix, int iy,
                   const ChiParams& cp);

// Product of chi_x,j over the x side and chi_y,j over the y side of a split.
bool chi_bar(const Diamond& d, const DiamondSplit& split, const FieldConfig& f,
             const ChiParams& cp);

// Averaged path flow over K quasi-uniform points of the cross-section at
// height h. Counts are kept in integers so the unit divergence is exact.
struct SpreadFlowResult {
  UnitFlow flow;                 // counts / paths
  std::vector<long long> counts; // signed edge counts, divergence exactly paths*(dx-dy)
  int paths = 0;
  double h = 0;
  double max_tracking_dist = 0;  // max distance from a used vertex to its polyline
  int staircase_fallbacks = 0;   // paths rerouted through the in-graph search
};

SpreadFlowResult spread_flow(const Diamond& d, double fx, double fy, int paths = 200,
                             uint64_t seed = 0);

// One deformed-diamond evaluation of the resistance-bound ingredients at a
// fixed field: the chi_bar gate, a * (Neumann resistance of the gamma
// network), and the spread-flow energy that dominates it.
struct ResistanceBoundReport {
  bool chi_bar_holds = false;
  double a_times_neumann = 0;   // a * D^N via the gamma = c^{xy}/a network
  double spread_energy = 0;     // energy of the averaged flow in the gamma network
  double h = 0;
  int paths = 0;
  double max_tracking_dist = 0;
  int staircase_fallbacks = 0;
};

ResistanceBoundReport resistance_bound_check(const Diamond& d, double fx, double fy,
                                             double a_uniform, const FieldConfig& f,
                                             const ChiParams& cp, int paths,
                                             uint64_t seed);

// Edge-list CSV: header "i,j,conductance".
void write_network_csv(std::ostream& os, const ConductanceNetwork& net);
ConductanceNetwork read_network_csv(std::istream& is, int root = 0);

// Directed edge-list CSV for flows: header "i,j,theta", rows oriented along
// the stored first->second direction.
void write_flow_csv(std::ostream& os, const Graph& g, const UnitFlow& f);

}  // namespace errw

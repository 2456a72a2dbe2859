#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace errw {

// Resolved experiment configuration: JSON config file merged with flags
// (flags win). Unknown JSON keys are rejected.
struct RunConfig {
  std::string kind;
  std::string graph = "box";  // box | single-edge | triangle | hypercube
  int dim = 3;
  int radius = 1;
  double a = 1.0;
  double b = 2.0;
  double alpha = 0.125;
  double m = 1.0;
  uint64_t seed = 1;
  int chains = 4;
  long long sweeps = 100000;  // retained sweeps
  long long burnin = 100000;
  int thin = 10;
  long long runs = 100000;   // replications for escape-probability
  long long steps = 1000;    // trajectory length for simulate-*
  int num_edges = 2;         // edges for check-moments
  std::vector<int> lengths = {10, 20, 40};  // diamond family for the resistance bound
  int flow_paths = 200;
  double fx = 0.6, fy = 0.6;
  int scale = 1;             // n for check-goodpoints
  long long fields = 1000;   // sampled fields for check-goodpoints
  int threads = 0;           // worker pool size; 0 = runtime default
  bool serial = false;       // force the serial reference path
  std::string out = "out";
};

// Parses argv (and --config JSON). Throws std::invalid_argument with the
// offending field named. kind comes from the first positional argument.
RunConfig parse_cli(const std::vector<std::string>& args);

// Validates semantic constraints (positivity, kind-specific ranges).
void validate_config(const RunConfig& c);

// Runs the experiment, writing report.json, data.csv and repro.txt under
// c.out. Returns the process exit code: 0 = pass, 2 = statistical
// suspicion, 1 = error.
int run_experiment(const RunConfig& c, const std::string& invocation);

}  // namespace errw

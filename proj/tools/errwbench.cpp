#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#include "errw/field.hpp"
#include "errw/geometry.hpp"
#include "errw/parallel.hpp"
#include "errw/walkers.hpp"

using namespace errw;

namespace {

double seconds(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-36s %10.3f %12.3f %9.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  // optional multiplier scales every workload up or down
  double scale = argc > 1 ? std::atof(argv[1]) : 1.0;
  if (!(scale > 0)) {
    std::fprintf(stderr, "usage: errwbench [scale]\n");
    return 1;
  }

  std::printf("%-36s %10s %12s %9s\n", "kernel", "serial_s", "parallel_s", "speedup");

  {
    LatticeBox box(3, 1);
    Graph g = box.graph();
    EdgeWeights a = EdgeWeights::uniform(g, 2.0);
    McmcParams p;
    p.burnin_sweeps = (int64_t)(2000 * scale);
    p.retained_sweeps = (int64_t)(8000 * scale);
    p.thin = 10;
    p.chains = 8;
    p.seed = 7;
    p.mode = ExecMode::Serial;
    double ts = seconds([&] { sample_field_mcmc(g, a, box.center_index(), p); });
    p.mode = ExecMode::Parallel;
    double tp = seconds([&] { sample_field_mcmc(g, a, box.center_index(), p); });
    row("field-mcmc 8 chains (27 vertices)", ts, tp);
  }

  {
    LatticeBox box(3, 2);
    Graph g = box.graph();
    EdgeWeights a = EdgeWeights::uniform(g, 2.0);
    McmcParams p;
    p.burnin_sweeps = (int64_t)(200 * scale);
    p.retained_sweeps = (int64_t)(800 * scale);
    p.thin = 10;
    p.chains = 8;
    p.seed = 7;
    p.mode = ExecMode::Serial;
    double ts = seconds([&] { sample_joint_mcmc(g, a, box.center_index(), p); });
    p.mode = ExecMode::Parallel;
    double tp = seconds([&] { sample_joint_mcmc(g, a, box.center_index(), p); });
    row("joint-mcmc 8 chains (125 vertices)", ts, tp);
  }

  {
    int64_t runs = (int64_t)(40000 * scale);
    double ts = seconds([&] {
      escape_probability_experiment(3, 2, 1.0, runs, 11, 1000000, ExecMode::Serial);
    });
    double tp = seconds([&] {
      escape_probability_experiment(3, 2, 1.0, runs, 11, 1000000, ExecMode::Parallel);
    });
    row(("escape walks (" + std::to_string(runs) + " runs)").c_str(), ts, tp);
  }

  return 0;
}

#include "errw/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "errw/field.hpp"
#include "errw/geometry.hpp"
#include "errw/network.hpp"
#include "errw/parallel.hpp"
#include "errw/report.hpp"
#include "errw/walkers.hpp"
#include "errw/ward.hpp"

namespace errw {

namespace {

const std::set<std::string> kKinds = {
    "simulate-errw",   "simulate-vrjp",        "check-ward",
    "check-protected", "check-moments",        "check-fluctuations",
    "check-goodpoints", "check-resistance-bound", "escape-probability",
    "pipeline"};

void apply_json_key(RunConfig& c, const std::string& key, const nlohmann::json& v) {
  try {
    if (key == "graph")
      c.graph = v.get<std::string>();
    else if (key == "dim")
      c.dim = v.get<int>();
    else if (key == "radius")
      c.radius = v.get<int>();
    else if (key == "a")
      c.a = v.get<double>();
    else if (key == "b")
      c.b = v.get<double>();
    else if (key == "alpha")
      c.alpha = v.get<double>();
    else if (key == "m")
      c.m = v.get<double>();
    else if (key == "seed")
      c.seed = v.get<uint64_t>();
    else if (key == "chains")
      c.chains = v.get<int>();
    else if (key == "sweeps")
      c.sweeps = v.get<long long>();
    else if (key == "burnin")
      c.burnin = v.get<long long>();
    else if (key == "thin")
      c.thin = v.get<int>();
    else if (key == "runs")
      c.runs = v.get<long long>();
    else if (key == "steps")
      c.steps = v.get<long long>();
    else if (key == "num-edges")
      c.num_edges = v.get<int>();
    else if (key == "lengths")
      c.lengths = v.get<std::vector<int>>();
    else if (key == "flow-paths")
      c.flow_paths = v.get<int>();
    else if (key == "fx")
      c.fx = v.get<double>();
    else if (key == "fy")
      c.fy = v.get<double>();
    else if (key == "scale")
      c.scale = v.get<int>();
    else if (key == "fields")
      c.fields = v.get<long long>();
    else if (key == "threads")
      c.threads = v.get<int>();
    else if (key == "serial")
      c.serial = v.get<bool>();
    else if (key == "out")
      c.out = v.get<std::string>();
    else
      throw std::invalid_argument("config: unknown field '" + key + "'");
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config: field '" + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_cli(const std::vector<std::string>& args) {
  RunConfig c;
  std::string config_path;
  CLI::App app{"reinforced-walk numerical laboratory"};
  app.add_option("kind", c.kind, "experiment kind")->required();
  app.add_option("--graph", c.graph, "box | single-edge | triangle | hypercube");
  app.add_option("--dim", c.dim, "lattice dimension");
  app.add_option("--radius", c.radius, "box radius");
  app.add_option("--a", c.a, "uniform initial edge weight");
  app.add_option("--b", c.b, "gate threshold");
  app.add_option("--alpha", c.alpha, "gate growth exponent");
  app.add_option("--m", c.m, "moment exponent");
  app.add_option("--seed", c.seed, "rng seed");
  app.add_option("--chains", c.chains, "mcmc chains");
  app.add_option("--sweeps", c.sweeps, "retained sweeps");
  app.add_option("--burnin", c.burnin, "burn-in sweeps");
  app.add_option("--thin", c.thin, "thinning stride");
  app.add_option("--runs", c.runs, "escape replications");
  app.add_option("--steps", c.steps, "trajectory steps");
  app.add_option("--num-edges", c.num_edges, "edges for the moment product");
  app.add_option("--lengths", c.lengths, "diamond lengths")->delimiter(',');
  app.add_option("--flow-paths", c.flow_paths, "paths in the averaged flow");
  app.add_option("--fx", c.fx, "split fraction at x");
  app.add_option("--fy", c.fy, "split fraction at y");
  app.add_option("--scale", c.scale, "goodness scale n");
  app.add_option("--fields", c.fields, "sampled fields");
  app.add_option("--threads", c.threads, "worker count, 0 = runtime default");
  app.add_flag("--serial", c.serial, "force the serial reference path");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--config", config_path, "JSON config file, flags win");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    throw std::invalid_argument(app.help());
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw std::invalid_argument("config: cannot open " + config_path);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: " + config_path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") throw std::invalid_argument("config: kind must be the positional argument");
      if (app.count("--" + key) > 0) continue;  // explicit flags win
      apply_json_key(c, key, value);
    }
  }
  return c;
}

void validate_config(const RunConfig& c) {
  if (!kKinds.count(c.kind)) throw std::invalid_argument("unknown kind '" + c.kind + "'");
  if (c.graph != "box" && c.graph != "single-edge" && c.graph != "triangle" &&
      c.graph != "hypercube")
    throw std::invalid_argument("graph must be box, single-edge, triangle or hypercube");
  if (!(c.a > 0)) throw std::invalid_argument("edge weight a must be positive");
  if (c.dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (c.radius < 1) throw std::invalid_argument("radius must be >= 1");
  if (!(c.b > 0)) throw std::invalid_argument("gate threshold b must be positive");
  if (!(c.alpha >= 0) || c.alpha > 1) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(c.m > 0)) throw std::invalid_argument("moment exponent m must be positive");
  if (c.chains < 1) throw std::invalid_argument("chains must be >= 1");
  if (c.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  if (c.burnin < 0) throw std::invalid_argument("burnin must be >= 0");
  if (c.thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (c.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (c.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (c.num_edges < 1) throw std::invalid_argument("num-edges must be >= 1");
  if (c.lengths.empty()) throw std::invalid_argument("lengths must not be empty");
  for (int l : c.lengths)
    if (l < 2) throw std::invalid_argument("every diamond length must be >= 2");
  if (c.flow_paths < 1) throw std::invalid_argument("flow-paths must be >= 1");
  if (c.fx < 0.2 || c.fx > 1.0 || c.fy < 0.2 || c.fy > 1.0 || c.fx + c.fy < 1.2)
    throw std::invalid_argument("split fractions need 1/5 <= fx, fy <= 1 and fx + fy >= 6/5");
  if (c.scale < 0 || c.scale > 8) throw std::invalid_argument("scale must lie in [0, 8]");
  if (c.fields < 1) throw std::invalid_argument("fields must be >= 1");
  if (c.threads < 0) throw std::invalid_argument("threads must be >= 0");

  if (c.kind == "check-ward" || c.kind == "check-fluctuations") {
    if (c.m > c.a / 4.0 + 1e-12)
      throw std::invalid_argument("this check needs m <= a/4");
  }
  if (c.kind == "check-protected" && c.m > c.a / 4.0 + 1e-12)
    throw std::invalid_argument("this check needs m <= a/4");
  if (c.kind == "check-moments" && c.m > c.a / 2.0 + 1e-12)
    throw std::invalid_argument("this check needs m <= a/2");
  if (c.kind == "check-resistance-bound")
    ChiParams{c.b, c.alpha}.validate(true);
  if (c.kind == "check-goodpoints") {
    if (c.graph != "box")
      throw std::invalid_argument("check-goodpoints runs on the box graph");
    int side = 1;
    for (int k = 0; k < c.scale; ++k) side *= 4;
    if (side / 2 > c.radius)
      throw std::invalid_argument("radius too small for scale: the cube must fit in the box");
  }
  if (c.kind == "check-goodpoints" || c.kind == "escape-probability" ||
      c.kind == "pipeline") {
    if (c.graph != "box")
      throw std::invalid_argument(c.kind + " runs on the box graph");
  }
}

namespace {

struct GraphPick {
  Graph g;
  int root = 0;
  int x = 0, y = 1;  // default probe pair
};

GraphPick make_graph(const RunConfig& c) {
  GraphPick p;
  if (c.graph == "box") {
    LatticeBox box(c.dim, c.radius);
    p.g = box.graph();
    p.root = box.center_index();
    Point nb((size_t)c.dim, 0);
    nb[0] = 1;
    p.x = p.root;
    p.y = box.index_of(nb);
  } else if (c.graph == "single-edge") {
    p.g = Graph::single_edge();
  } else if (c.graph == "triangle") {
    p.g = Graph::cycle(3);
  } else {
    p.g = Graph::hypercube(c.dim);
  }
  return p;
}

McmcParams mcmc_params(const RunConfig& c, ExecMode mode) {
  McmcParams p;
  p.burnin_sweeps = c.burnin;
  p.retained_sweeps = c.sweeps;
  p.thin = c.thin;
  p.chains = c.chains;
  p.seed = c.seed;
  p.mode = mode;
  return p;
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["kind"] = c.kind;
  j["graph"] = c.graph;
  j["dim"] = c.dim;
  j["radius"] = c.radius;
  j["a"] = c.a;
  j["b"] = c.b;
  j["alpha"] = c.alpha;
  j["m"] = c.m;
  j["seed"] = c.seed;
  j["chains"] = c.chains;
  j["sweeps"] = c.sweeps;
  j["burnin"] = c.burnin;
  j["thin"] = c.thin;
  j["runs"] = c.runs;
  j["steps"] = c.steps;
  j["num-edges"] = c.num_edges;
  j["lengths"] = c.lengths;
  j["flow-paths"] = c.flow_paths;
  j["fx"] = c.fx;
  j["fy"] = c.fy;
  j["scale"] = c.scale;
  j["fields"] = c.fields;
  j["threads"] = c.threads;
  j["serial"] = c.serial;
  j["out"] = c.out;
  return j;
}

int exit_for(const std::vector<WardReport>& reports) {
  for (const auto& r : reports)
    if (!verdict_pass(r.verdict)) return 2;
  return 0;
}

}  // namespace

int run_experiment(const RunConfig& c, const std::string& invocation) {
  try {
    validate_config(c);
    if (c.threads > 0) set_worker_count(c.threads);
    ExecMode mode = c.serial ? ExecMode::Serial : ExecMode::Parallel;
    std::filesystem::create_directories(c.out);
    std::string report_path = c.out + "/report.json";
    std::string data_path = c.out + "/data.csv";
    std::filesystem::remove(data_path);

    nlohmann::json report;
    report["config"] = config_json(c);
    int code = 0;

    GraphPick gp = make_graph(c);
    McmcParams mp = mcmc_params(c, mode);

    if (c.kind == "simulate-errw") {
      Rng rng(c.seed, 0);
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      ErrwState st = errw_start(gp.g, a, gp.root);
      Trajectory t;
      t.vertices.push_back(st.position);
      std::vector<char> visited((size_t)gp.g.n, 0);
      visited[(size_t)st.position] = 1;
      for (long long k = 0; k < c.steps; ++k) {
        int v = errw_step(st, rng);
        visited[(size_t)v] = 1;
        t.vertices.push_back(v);
      }
      std::ofstream os(data_path);
      write_trajectory_csv(os, t);
      int count = 0;
      for (char v : visited) count += v;
      report["results"] = {{"steps", c.steps},
                           {"vertices_visited", count},
                           {"graph_size", gp.g.n},
                           {"final_vertex", st.position}};
    } else if (c.kind == "simulate-vrjp") {
      Rng rng(c.seed, 0);
      std::vector<double> w(gp.g.edges.size(), c.a);
      Trajectory t = vrjp_run(gp.g, w, gp.root, c.steps, rng);
      std::ofstream os(data_path);
      write_trajectory_csv(os, t);
      double total = 0;
      for (double h : t.holding) total += h;
      report["results"] = {{"jumps", c.steps}, {"total_time", total}, {"graph_size", gp.g.n}};
    } else if (c.kind == "check-ward") {
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      WardReport r = ward_identity_estimate(gp.g, a, gp.root, gp.x, gp.y, c.m, mp);
      append_run_ledger(data_path, r);
      report["results"] = {to_json(r)};
      if (c.graph == "single-edge") {
        WardReport b = single_edge_b_moment(a, c.m, mp);
        append_run_ledger(data_path, b);
        report["results"].push_back(to_json(b));
        code = exit_for({r, b});
      } else {
        code = exit_for({r});
      }
    } else if (c.kind == "check-protected") {
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      std::vector<WardRegion> regions;
      auto edge_region = [&](int e) {
        auto [i, j] = gp.g.edges[(size_t)e];
        return WardRegion{i, j, {i, j}};
      };
      regions.push_back(edge_region(0));
      auto [f0, s0] = gp.g.edges[0];
      for (int e = (int)gp.g.edges.size() - 1; e > 0; --e) {
        auto [i, j] = gp.g.edges[(size_t)e];
        if (i != f0 && i != s0 && j != f0 && j != s0) {
          regions.push_back(edge_region(e));
          break;
        }
      }
      std::vector<double> m(regions.size(), c.m);
      ChiParams cp{c.b, c.alpha};
      ProtectedReports pr = protected_ward_estimate(gp.g, a, gp.root, regions, m, cp, mp);
      for (const auto& r : {pr.plain, pr.gated, pr.moments}) append_run_ledger(data_path, r);
      report["results"] = {to_json(pr.plain), to_json(pr.gated), to_json(pr.moments)};
      report["c_empirical"] = pr.c_empirical;
      code = exit_for({pr.plain, pr.gated, pr.moments});
    } else if (c.kind == "check-moments") {
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      if (c.num_edges > (int)gp.g.edges.size())
        throw std::invalid_argument("num-edges exceeds the edge count of the graph");
      std::vector<int> ids;
      for (int e = 0; e < c.num_edges; ++e) ids.push_back(e);
      std::vector<double> m((size_t)c.num_edges, c.m);
      WardReport r = moment_bound_estimate(gp.g, a, gp.root, ids, m, mp);
      append_run_ledger(data_path, r);
      report["results"] = {to_json(r)};
      code = exit_for({r});
    } else if (c.kind == "check-fluctuations") {
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      std::vector<std::pair<int, int>> pairs;
      if (gp.g.n <= 40) {
        for (int x = 0; x < gp.g.n; ++x)
          for (int y = x + 1; y < gp.g.n; ++y) pairs.push_back({x, y});
      } else {
        for (int y = 0; y < gp.g.n; ++y)
          if (y != gp.root) pairs.push_back({gp.root, y});
      }
      std::vector<WardReport> rs = fluctuation_estimate(gp.g, a, gp.root, pairs, c.m, mp);
      for (const auto& r : rs) append_run_ledger(data_path, r);
      double worst = 0;
      for (const auto& r : rs) worst = std::max(worst, r.z);
      report["results"] = {{"pairs", (long long)rs.size()}, {"max_z", worst}};
      code = exit_for(rs);
    } else if (c.kind == "check-goodpoints") {
      LatticeBox box(c.dim, c.radius);
      EdgeWeights a = EdgeWeights::uniform(gp.g, c.a);
      McmcParams gmp = mp;
      gmp.retained_sweeps =
          ((c.fields + c.chains - 1) / c.chains) * (long long)c.thin;
      FieldRun run = sample_field_mcmc(gp.g, a, gp.root, gmp);
      std::vector<const FieldSample*> all = run.all();
      long long used = std::min<long long>((long long)all.size(), c.fields);
      ChiParams cp{c.b, c.alpha};
      Point center((size_t)c.dim, 0);
      long long violations = 0, lhs_hits = 0;
      double rhs_sum = 0;
      long long tree_count = 0;
      std::ofstream os(data_path);
      os << "field,no_good_point,rhs,holds\n";
      for (long long i = 0; i < used; ++i) {
        FieldConfig f;
        f.root = gp.root;
        f.u = all[(size_t)i]->u;
        f.s = all[(size_t)i]->s;
        GoodPointReport r = good_point_check(box, f, cp, c.scale, c.m, center);
        tree_count = r.tree_count;
        if (!r.holds) ++violations;
        if (r.no_good_point) ++lhs_hits;
        rhs_sum += r.rhs;
        os << i << ',' << (r.no_good_point ? 1 : 0) << ',' << fmt_double(r.rhs) << ','
           << (r.holds ? 1 : 0) << '\n';
      }
      report["results"] = {{"fields", used},
                           {"violations", violations},
                           {"no_good_point_fields", lhs_hits},
                           {"mean_rhs", rhs_sum / (double)used},
                           {"tree_count", tree_count}};
      code = violations == 0 ? 0 : 2;
    } else if (c.kind == "check-resistance-bound") {
      ChiParams cp{c.b, c.alpha};
      std::ofstream os(data_path);
      os << "length,a_times_neumann,spread_energy,h,paths,fallbacks,max_tracking\n";
      double lo = 0, hi = 0;
      bool dominated = true;
      nlohmann::json rows = nlohmann::json::array();
      for (size_t li = 0; li < c.lengths.size(); ++li) {
        int l = c.lengths[li];
        Point x((size_t)c.dim, 0), y((size_t)c.dim, 0);
        y[0] = l;
        Diamond d = build_diamond(DiamondKind::Deformed, x, y);
        FieldConfig f = FieldConfig::zero((int)d.members.size(), 0);
        ResistanceBoundReport r =
            resistance_bound_check(d, c.fx, c.fy, c.a, f, cp, c.flow_paths, c.seed);
        os << l << ',' << fmt_double(r.a_times_neumann) << ',' << fmt_double(r.spread_energy)
           << ',' << fmt_double(r.h) << ',' << r.paths << ',' << r.staircase_fallbacks << ','
           << fmt_double(r.max_tracking_dist) << '\n';
        if (li == 0) lo = hi = r.a_times_neumann;
        lo = std::min(lo, r.a_times_neumann);
        hi = std::max(hi, r.a_times_neumann);
        if (r.a_times_neumann > r.spread_energy * (1.0 + 1e-9)) dominated = false;
        rows.push_back({{"length", l},
                        {"a_times_neumann", r.a_times_neumann},
                        {"spread_energy", r.spread_energy},
                        {"h", r.h},
                        {"fallbacks", r.staircase_fallbacks}});
      }
      bool plateau = hi <= 1.5 * lo;
      report["results"] = {{"rows", rows}, {"plateau", plateau}, {"dominated", dominated}};
      code = (plateau && dominated) ? 0 : 2;
    } else if (c.kind == "escape-probability") {
      EscapeResult r = escape_probability_experiment(c.dim, c.radius, c.a, c.runs, c.seed,
                                                     10000000, mode);
      std::ofstream os(data_path);
      os << "estimate,se,runs,censored\n"
         << fmt_double(r.estimate) << ',' << fmt_double(r.se) << ',' << r.runs << ','
         << r.censored << '\n';
      report["results"] = nlohmann::json::parse(escape_result_json(r));
    } else if (c.kind == "pipeline") {
      PipelineReport r = transience_pipeline_check(c.dim, c.radius, c.a, mp);
      std::ofstream os(data_path);
      os << "mean_w_r,se,unit_resistance,ratio,mean_p,jensen_ok,samples\n"
         << fmt_double(r.mean_w_r) << ',' << fmt_double(r.se) << ','
         << fmt_double(r.unit_resistance) << ',' << fmt_double(r.ratio) << ','
         << fmt_double(r.mean_p) << ',' << (r.jensen_ok ? 1 : 0) << ',' << r.samples << '\n';
      report["results"] = {{"mean_w_r", r.mean_w_r},
                           {"se", r.se},
                           {"unit_resistance", r.unit_resistance},
                           {"ratio", r.ratio},
                           {"mean_p", r.mean_p},
                           {"jensen_ok", r.jensen_ok},
                           {"samples", r.samples}};
      code = r.jensen_ok ? 0 : 2;
    }

    report["exit_code"] = code;
    write_text_file(report_path, report.dump(2) + "\n");
    std::ostringstream repro;
    repro << invocation << "\n" << "seed " << c.seed << "\n" << config_json(c).dump(2) << "\n";
    write_text_file(c.out + "/repro.txt", repro.str());
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace errw

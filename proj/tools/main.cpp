// saconc command-line interface: constants, bound curves, simulation,
// validation campaigns, Poisson solves, and the deterministic counterexample
// tables. See README.md for config schemas and CSV layouts.

#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "saconc/bounds.hpp"
#include "saconc/markov.hpp"
#include "saconc/scenario.hpp"
#include "saconc/sim.hpp"

namespace {

using nlohmann::json;
using namespace saconc;

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("cannot open config file \"" + path + "\"");
  json j;
  in >> j;
  return j;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw BadConfig("cannot open output file \"" + out_path + "\"");
  out << text;
}

std::vector<double> parse_deltas(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw BadConfig("empty --delta list");
  return out;
}

// Shared per-command state filled from flags.
struct Options {
  std::string config;
  std::string out;
  std::string delta_csv;
  std::uint64_t seed = 0;
  bool seed_set = false;
  long paths = 0;
  int workers = 0;
};

ScenarioConfig load_scenario_config(const Options& opt) {
  ScenarioConfig cfg = scenario_config_from_json(load_config(opt.config));
  if (opt.seed_set) cfg.seed = opt.seed;
  if (opt.paths > 0) cfg.paths = opt.paths;
  if (opt.workers > 0) cfg.workers = opt.workers;
  if (!opt.delta_csv.empty()) {
    cfg.scenario.deltas = parse_deltas(opt.delta_csv);
  }
  return cfg;
}

// One bound row (squared-error bound per step) for the scenario at delta.
std::vector<double> bound_row(const Scenario& sc, const LedgerInputs& in,
                              const ConstantsLedger& led, double delta,
                              double scale) {
  std::vector<double> row(static_cast<std::size_t>(sc.horizon) + 1);
  for (long k = 0; k <= sc.horizon; ++k) {
    double b;
    switch (sc.kind) {
      case Scenario::Kind::Unbounded:
        b = hp_bound_unbounded(in, sc.model, static_cast<double>(k), delta,
                               sc.trunc_T);
        break;
      case Scenario::Kind::Polyak:
        b = (k == 0) ? std::numeric_limits<double>::infinity()
                     : polyak_bound(led, sc.sch.z, static_cast<double>(k),
                                    delta);
        break;
      default:
        b = hp_bound(led, static_cast<double>(k), delta);
    }
    row[static_cast<std::size_t>(k)] = b * scale;
  }
  return row;
}

int cmd_catalog(const Options& opt) {
  std::ostringstream os;
  for (const auto& sc : scenario_catalog()) {
    os << sc.name << "\t" << sc.regime << "\t" << sc.description << "\n";
  }
  write_output(opt.out, os.str());
  return 0;
}

int cmd_constants(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt);
  if (cfg.scenario.kind == Scenario::Kind::Counterexample) {
    throw BadConfig("counterexample scenarios have no constants ledger");
  }
  const ConstantsLedger led =
      constants_ledger(scenario_ledger_inputs(cfg.scenario));
  write_output(opt.out, led.to_json().dump(2) + "\n");
  return 0;
}

int cmd_bound(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt);
  const Scenario& sc = cfg.scenario;
  if (sc.kind == Scenario::Kind::Counterexample) {
    throw BadConfig("counterexample scenarios have no bound curve");
  }
  const LedgerInputs in = scenario_ledger_inputs(sc);
  const ConstantsLedger led = constants_ledger(in);
  std::ostringstream os;
  os << "k,delta,bound\n";
  const std::vector<long> ks = geometric_checkpoints(sc.sch.h, sc.horizon);
  for (double delta : sc.deltas) {
    std::vector<double> row = bound_row(sc, in, led, delta, cfg.bound_scale);
    for (long k : ks) {
      os << k << "," << delta << "," << row[static_cast<std::size_t>(k)]
         << "\n";
    }
  }
  write_output(opt.out, os.str());
  return 0;
}

int cmd_simulate(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt);
  const Scenario& sc = cfg.scenario;
  std::vector<double> row;
  if (sc.kind != Scenario::Kind::Counterexample) {
    const LedgerInputs in = scenario_ledger_inputs(sc);
    const ConstantsLedger led = constants_ledger(in);
    row = bound_row(sc, in, led, sc.deltas.at(0), cfg.bound_scale);
  } else {
    row.assign(static_cast<std::size_t>(sc.horizon) + 1,
               std::numeric_limits<double>::infinity());
  }
  std::vector<long> cps(static_cast<std::size_t>(sc.horizon) + 1);
  for (long k = 0; k <= sc.horizon; ++k) cps[static_cast<std::size_t>(k)] = k;
  const std::uint64_t seed = Rng::stream_seed(cfg.seed, 0);
  Trajectory t =
      (sc.kind == Scenario::Kind::Polyak)
          ? run_polyak(sc.spec, sc.model, sc.sch, sc.x0, sc.horizon, cps, seed)
          : run_sa(sc.spec, sc.model, sc.sch, sc.x0, sc.horizon, cps, seed);
  std::ostringstream os;
  os << "k,error_sq,bound,violated\n";
  for (long k = 0; k <= sc.horizon; ++k) {
    const double e = t.errors_sq[static_cast<std::size_t>(k)];
    const double b = row[static_cast<std::size_t>(k)];
    os << k << "," << e << "," << b << "," << (e > b ? 1 : 0) << "\n";
  }
  write_output(opt.out, os.str());
  return 0;
}

int cmd_validate(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt);
  ValidationReport rep = run_validation(cfg.scenario, cfg.paths, cfg.seed,
                                        cfg.workers, cfg.bound_scale);
  write_output(opt.out, rep.to_json().dump(2) + "\n");
  return rep.pass ? 0 : 2;
}

int cmd_poisson(const Options& opt) {
  const json j = load_config(opt.config);
  MarkovChain chain = MarkovChain::from_json(j.at("chain"));
  const auto& gj = j.at("g");
  const int n = chain.n_states();
  if (static_cast<int>(gj.size()) != n) {
    throw BadConfig("g must have one row per state");
  }
  const int d = static_cast<int>(gj.at(0).size());
  Eigen::MatrixXd g(n, d);
  for (int s = 0; s < n; ++s) {
    for (int c = 0; c < d; ++c) g(s, c) = gj.at(s).at(c).get<double>();
  }
  PoissonSolution sol = solve_poisson(chain, g);
  json out;
  out["pi"] = std::vector<double>(chain.pi().data(),
                                  chain.pi().data() + chain.pi().size());
  json V = json::array();
  for (int s = 0; s < n; ++s) {
    std::vector<double> rowv(d);
    for (int c = 0; c < d; ++c) rowv[static_cast<std::size_t>(c)] = sol.V(s, c);
    V.push_back(rowv);
  }
  out["V"] = V;
  out["residual"] = sol.residual_norm;
  write_output(opt.out, out.dump(2) + "\n");
  return 0;
}

int cmd_counterexample(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt);
  const Scenario& sc = cfg.scenario;
  if (sc.kind != Scenario::Kind::Counterexample) {
    throw BadConfig("config must name a counterexample scenario");
  }
  std::ostringstream os;
  os << "k,prob,path_value,mgf_lower,mgf_lower_integral\n";
  for (long k : sc.cx_grid) {
    const CounterexampleLower lb =
        counterexample_lower_mgf(sc.cx, k, sc.cx_lambda, sc.cx_beta);
    os << k << "," << lb.prob << "," << lb.path_value << "," << lb.mgf_lower
       << "," << lb.mgf_lower_integral << "\n";
  }
  write_output(opt.out, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic-approximation concentration toolkit"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", opt.config, "JSON config file")->required();
    }
    sub->add_option("--out", opt.out, "output file (default: stdout)");
    sub->add_option("--seed", opt.seed, "master seed")
        ->each([&](const std::string&) { opt.seed_set = true; });
    sub->add_option("--paths", opt.paths, "Monte Carlo path count");
    sub->add_option("--workers", opt.workers, "worker thread count");
    sub->add_option("--delta", opt.delta_csv,
                    "comma-separated confidence levels");
  };

  CLI::App* c_catalog = app.add_subcommand("catalog", "list built-in scenarios");
  add_common(c_catalog, false);
  CLI::App* c_constants =
      app.add_subcommand("constants", "emit the constants ledger as JSON");
  add_common(c_constants, true);
  CLI::App* c_bound =
      app.add_subcommand("bound", "sample the bound curve to CSV");
  add_common(c_bound, true);
  CLI::App* c_simulate =
      app.add_subcommand("simulate", "run one path, trajectory CSV");
  add_common(c_simulate, true);
  CLI::App* c_validate =
      app.add_subcommand("validate", "full validation report JSON");
  add_common(c_validate, true);
  CLI::App* c_poisson =
      app.add_subcommand("poisson", "solve a Poisson system and print it");
  add_common(c_poisson, true);
  CLI::App* c_counter = app.add_subcommand(
      "counterexample", "deterministic lower-bound table CSV");
  add_common(c_counter, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (c_catalog->parsed()) return cmd_catalog(opt);
    if (c_constants->parsed()) return cmd_constants(opt);
    if (c_bound->parsed()) return cmd_bound(opt);
    if (c_simulate->parsed()) return cmd_simulate(opt);
    if (c_validate->parsed()) return cmd_validate(opt);
    if (c_poisson->parsed()) return cmd_poisson(opt);
    if (c_counter->parsed()) return cmd_counterexample(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

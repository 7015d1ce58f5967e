#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "relay_mtl/control/linalg.hpp"
#include "relay_mtl/mtl/parse.hpp"
#include "relay_mtl/scenario/outputs.hpp"
#include "relay_mtl/scenario/scenario.hpp"

namespace fs = std::filesystem;
using namespace relay_mtl;

namespace {

enum Exit { kOk = 0, kOther = 1, kInfeasible = 2, kConfig = 3, kDiverged = 4 };

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_builtin(const std::string& s) {
  const auto names = scenario::builtin_names();
  return std::find(names.begin(), names.end(), s) != names.end();
}

// A builtin name, or a path to a scenario document.
scenario::ScenarioConfig load(const std::string& spec) {
  if (!fs::exists(spec) && is_builtin(spec)) return scenario::builtin(spec);
  return scenario::load_scenario(spec);
}

int exit_code(const runtime::RunLog& log) {
  switch (log.status) {
    case runtime::RunStatus::Completed: return log.verdict.weak ? kOk : kOther;
    case runtime::RunStatus::Infeasible: return kInfeasible;
    case runtime::RunStatus::Diverged: return kDiverged;
    default: return kOther;
  }
}

struct RunOptions {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string solver;
  std::string out = "out";
  bool desk = false;
  std::string sweep;
  bool quiet = false;
};

// Flag beats RELAY_MTL_SOLVER, which beats the scenario document.
void pick_solver(scenario::ScenarioConfig& c, const std::string& flag) {
  if (!flag.empty()) {
    c.solver.backend = flag;
  } else if (const char* env = std::getenv("RELAY_MTL_SOLVER"); env != nullptr && *env != '\0') {
    c.solver.backend = env;
  }
  if (c.solver.backend != "builtin" && c.solver.backend.rfind("external:", 0) != 0) {
    throw scenario::ScenarioError("/solver/backend", "expected builtin or external:<command>");
  }
}

int run_one(const scenario::ScenarioConfig& c, const fs::path& out, bool quiet) {
  scenario::Assembled a = scenario::assemble(c);
  if (!a.bounds.termination_ok) {
    std::cerr << "warning: finite-termination conditions fail; running because force is set\n";
    for (const auto& f : a.bounds.failures) std::cerr << "  " << f << "\n";
  }
  if (!quiet) {
    a.problem.on_resolve = [](const runtime::ResolveRecord& r) {
      std::fprintf(stderr, "solve %d at %d (%s): %s, %d binaries, %ld nodes, %.2fs\n", r.id, r.index,
                   runtime::to_string(r.reason).c_str(), milp::to_string(r.status), r.binaries, r.stats.nodes,
                   r.stats.wall_seconds);
    };
  }
  const runtime::RunLog log = runtime::run_synthesis(a.problem);
  scenario::write_bundle(out, log, c, a);
  std::cout << c.name << " seed=" << c.seed << " " << scenario::summary_line(log) << "\n";
  if (log.abort) std::cerr << "aborted at index " << log.abort->index << ": " << log.abort->message << "\n";
  return exit_code(log);
}

// "seeds=a..b"
std::pair<std::uint64_t, std::uint64_t> parse_sweep(const std::string& s) {
  const std::string prefix = "seeds=";
  const auto dots = s.find("..");
  if (s.rfind(prefix, 0) != 0 || dots == std::string::npos) throw CLI::ValidationError("--sweep", "expected seeds=a..b");
  try {
    const auto a = std::stoull(s.substr(prefix.size(), dots - prefix.size()));
    const auto b = std::stoull(s.substr(dots + 2));
    if (b < a) throw CLI::ValidationError("--sweep", "empty seed range");
    return {a, b};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--sweep", "expected seeds=a..b");
  }
}

int cmd_run(const RunOptions& o) {
  scenario::ScenarioConfig c = load(o.scenario);
  if (o.desk) c = scenario::desk_scale(c);
  if (o.seed) c.seed = *o.seed;
  pick_solver(c, o.solver);
  if (o.sweep.empty()) return run_one(c, o.out, o.quiet);

  const auto [lo, hi] = parse_sweep(o.sweep);
  std::vector<std::uint64_t> seeds;
  for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  std::vector<int> codes(seeds.size(), kOther);
  std::vector<std::string> lines(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      scenario::ScenarioConfig ci = c;
      ci.seed = seeds[i];
      std::ostringstream line;
      try {
        scenario::Assembled a = scenario::assemble(ci);
        const runtime::RunLog log = runtime::run_synthesis(a.problem);
        scenario::write_bundle(fs::path(o.out) / ("seed-" + std::to_string(seeds[i])), log, ci, a);
        line << ci.name << " seed=" << ci.seed << " " << scenario::summary_line(log);
        codes[i] = exit_code(log);
      } catch (const std::exception& e) {
        line << ci.name << " seed=" << ci.seed << " error: " << e.what();
      }
      lines[i] = line.str();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(seeds.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int worst = kOk;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::cout << lines[i] << "\n";
    worst = std::max(worst, codes[i]);
  }
  return worst;
}

int cmd_validate(const std::string& spec, bool desk) {
  scenario::ScenarioConfig c = load(spec);
  if (desk) c = scenario::desk_scale(c);
  c.force = true;  // report instead of throwing
  const scenario::Assembled a = scenario::assemble(c);
  const auto& b = a.bounds;
  std::cout << "scenario " << c.name << "\n";
  for (const auto& e : b.explorers) {
    std::printf("  %-8s kappa=%.6g dwell_time=%.6g dwell_steps=%d Lambda(rho)=%.6g Lambda(rho*)=%.6g\n", e.name.c_str(),
                e.kappa, e.tau, e.n_steps, e.bound_rho, e.bound_rho_star);
  }
  std::printf("  v_t_ok=%d eta_ok=%d ultimate_ok=%d dwell_steps_ok=%d\n", b.v_t_ok, b.eta_ok, b.ultimate_ok,
              b.dwell_steps_ok);
  std::cout << "  formula: " << mtl::to_string(a.formula) << "\n";
  if (b.termination_ok) {
    std::cout << "valid\n";
    return kOk;
  }
  for (const auto& f : b.failures) std::cout << "  condition failed: " << f << "\n";
  if (load(spec).force) {
    std::cout << "valid (finite-termination conditions fail; force is set)\n";
    return kOk;
  }
  std::cout << "invalid\n";
  return kConfig;
}

int cmd_monitor(const std::string& trace_path, const std::string& formula_path) {
  const mtl::Trace tr = scenario::trace_from_csv(read_file(trace_path));
  const scenario::FormulaDocument doc = scenario::parse_formula_json(read_file(formula_path));
  const mtl::Verdict v = mtl::evaluate(tr, doc.formula, 0);
  std::cout << "samples=" << tr.horizon() + 1 << " weak=" << (v.weak ? "true" : "false")
            << " strong=" << (v.strong ? "true" : "false") << "\n";
  return v.weak ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay input synthesis under MTL specifications"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Synthesize inputs for a scenario and write the output bundle");
  run->add_option("--scenario", ro.scenario, "Scenario file or builtin name")->required();
  run->add_option("--seed", ro.seed, "Override the scenario seed");
  run->add_option("--solver", ro.solver, "builtin or external:<command>");
  run->add_option("--out", ro.out, "Output directory")->capture_default_str();
  run->add_flag("--desk-scale", ro.desk, "Divide coordinates by 10 and use N = 10");
  run->add_option("--sweep", ro.sweep, "Independent runs over seeds=a..b, in parallel");
  run->add_flag("-q,--quiet", ro.quiet, "No per-solve progress on stderr");

  std::string vspec;
  bool vdesk = false;
  auto* validate = app.add_subcommand("validate", "Check a scenario and print the dwell and bound analysis");
  validate->add_option("--scenario", vspec, "Scenario file or builtin name")->required();
  validate->add_flag("--desk-scale", vdesk, "Validate the desk-scale variant");

  std::string trace, formula;
  auto* monitor = app.add_subcommand("monitor", "Evaluate a formula on a recorded trajectories.csv");
  monitor->add_option("--trace", trace, "trajectories.csv")->required();
  monitor->add_option("--formula", formula, "formula.json")->required();

  std::string bname;
  bool bdesk = false;
  auto* builtin = app.add_subcommand("builtin", "Print a builtin scenario as JSON (no name: list them)");
  builtin->add_option("name", bname);
  builtin->add_flag("--desk-scale", bdesk, "Print the desk-scale variant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(ro);
    if (*validate) return cmd_validate(vspec, vdesk);
    if (*monitor) return cmd_monitor(trace, formula);
    if (*builtin) {
      if (bname.empty()) {
        for (const auto& n : scenario::builtin_names()) std::cout << n << "\n";
        return kOk;
      }
      scenario::ScenarioConfig c = scenario::builtin(bname);
      std::cout << scenario::to_json(bdesk ? scenario::desk_scale(c) : c);
      return kOk;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const mtl::ParseError& e) {
    std::cerr << "formula error: " << e.what() << "\n";
    return kConfig;
  } catch (const control::NumericalError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}

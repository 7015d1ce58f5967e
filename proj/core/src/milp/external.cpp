#include "relay_mtl/milp/external.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "relay_mtl/milp/lp_format.hpp"

namespace relay_mtl::milp {

namespace fs = std::filesystem;

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string quote(const std::string& path) { return "'" + replace_all(path, "'", "'\\''") + "'"; }

}  // namespace

ExternalBackend::ExternalBackend(std::string command_template) : template_(std::move(command_template)) {
  if (template_.find("{in}") == std::string::npos || template_.find("{out}") == std::string::npos) {
    throw std::invalid_argument("external solver command must contain {in} and {out}");
  }
}

SolverResult ExternalBackend::solve(const Model& model, const SolverConfig& config) const {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::path dir = fs::temp_directory_path() / ("relay_mtl_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(start.time_since_epoch().count()));
  fs::create_directories(dir, ec);
  if (ec) throw ExternalSolverError("cannot create temporary directory " + dir.string());
  const fs::path in = dir / "model.lp";
  const fs::path out = dir / "solution.txt";
  {
    std::ofstream f(in, std::ios::binary);
    f << export_lp(model);
    if (!f) throw ExternalSolverError("cannot write " + in.string());
  }
  const std::string cmd = replace_all(replace_all(template_, "{in}", quote(in.string())), "{out}", quote(out.string()));
  const int rc = std::system(cmd.c_str());
  auto cleanup = [&] { fs::remove_all(dir, ec); };
  if (rc != 0) {
    cleanup();
    throw ExternalSolverError("external solver exited with status " + std::to_string(rc) + ": " + cmd);
  }
  std::ifstream f(out, std::ios::binary);
  if (!f) {
    cleanup();
    throw ExternalSolverError("external solver produced no solution file");
  }
  std::stringstream ss;
  ss << f.rdbuf();
  f.close();
  cleanup();

  ImportedSolution sol = import_solution(ss.str(), model);
  SolverResult res;
  res.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string status = sol.status.value_or("optimal");
  if (status.find("infeasible") != std::string::npos) {
    res.status = SolveStatus::Infeasible;
    res.message = "external: " + status;
    return res;
  }
  const double viol = model.max_violation(sol.values);
  const bool ok = viol <= 1e-6 && sol.values.size() == static_cast<std::size_t>(model.num_variables());
  if (status.find("limit") != std::string::npos) {
    res.status = SolveStatus::IterationLimit;
    res.has_solution = ok && !sol.missing_defaulted();
  } else {
    if (!ok) {
      throw ExternalSolverError("external solution violates the model by " + std::to_string(viol));
    }
    res.status = SolveStatus::Optimal;
    res.has_solution = true;
  }
  if (res.has_solution) {
    res.objective = model.objective_value(sol.values);
    res.assignment = std::move(sol.values);
  }
  res.message = "external: " + status;
  if (!sol.missing.empty()) res.message += " (" + std::to_string(sol.missing.size()) + " variables defaulted to 0)";
  (void)config;
  return res;
}

}  // namespace relay_mtl::milp

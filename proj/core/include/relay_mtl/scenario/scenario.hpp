#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "relay_mtl/analysis/dwell.hpp"
#include "relay_mtl/runtime/synthesis.hpp"

namespace relay_mtl::scenario {

using control::Vector;

/// Invalid scenario document. `pointer()` is the JSON pointer of the offending value.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& pointer, const std::string& message)
      : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct Region {
  Vector center;  // 3
  Vector size;    // 3, full edge lengths
};

struct ExplorerSpec {
  std::string name;
  Vector initial_position;  // 3, z = 0
  double d_bar = 0.0;
};

struct ScenarioConfig {
  std::string name;
  double ts = 0.5;
  int horizon = 20;
  double comm_radius = 5.0;  // R
  double goal_radius = 5.0;  // R_f
  double eta = 4.0;
  double v_t = 1.0;
  double k = 0.1;
  Vector goal = Vector::Zero(2);  // C x_g in the plane
  Vector relay_position;          // 3
  Vector u_min;                   // 4
  Vector u_max;                   // 4
  double gravity = 9.81;
  std::vector<ExplorerSpec> explorers;
  std::map<std::string, Region> regions;
  std::string formula;  // practical part, over region names
  bool auto_dwell_formula = true;
  std::uint64_t seed = 1;
  int max_steps = 400;
  int substeps = 20;
  encode::EncoderOptions encoder;
  milp::SolverConfig solver;
  /// Run even when the finite-termination conditions fail.
  bool force = false;
};

/// Parses a schema-1 document. Unknown keys are rejected.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Canonical JSON form (parse_scenario(to_json(c)) == c).
std::string to_json(const ScenarioConfig& c);

/// Coordinates, region sizes and the input box divided by 10, N = 10; radii and V_T unchanged.
ScenarioConfig desk_scale(const ScenarioConfig& c);

/// Names accepted by `builtin`: scenario1-phi{1,2,3}, scenario2-phi{1,2,3}.
std::vector<std::string> builtin_names();
ScenarioConfig builtin(const std::string& name);

/// Name of the atom "relay within eta of the estimate of explorer `name`".
std::string service_atom(const std::string& explorer);

/// Everything a run needs, assembled from a validated configuration.
struct Assembled {
  analysis::BoundReport bounds;
  mtl::AtomTable atoms;
  mtl::Formula practical;
  mtl::Formula dwell;    // true when auto_dwell_formula is off
  mtl::Formula formula;  // dwell & practical
  runtime::SynthesisProblem problem;  // problem.world holds the models
};

/// Builds models, checks the termination conditions and composes the formula. The dwell part is
/// G F[0, n_i - 1] serve_i per explorer, so consecutive services are at most n_i samples apart.
/// Throws ScenarioError for unknown region names or formula syntax errors.
Assembled assemble(const ScenarioConfig& c);

}  // namespace relay_mtl::scenario

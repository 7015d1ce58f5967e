#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "relay_mtl/scenario/scenario.hpp"

namespace relay_mtl::scenario {

/// Fixed CSV header: step,time,agent,kind,x1..x8. Rows shorter than eight values are padded
/// with empty fields so every row has the same column count.
inline constexpr int kCsvValueColumns = 8;
std::string trajectories_header();

/// One row per (step, agent, kind): relay state/position/input, then per explorer
/// state/estimate/position/estimate_position. Numbers use "%.17g".
std::string trajectories_csv(const runtime::RunLog& log);

/// Rebuilds the monitored trace ("relay", "<name>.hat", "<name>") from trajectories.csv.
/// Throws std::runtime_error on malformed rows.
mtl::Trace trace_from_csv(const std::string& csv_text);

/// Per-explorer check of the estimated tracking error against its exponential envelope on
/// every inter-service interval (relay and goal-region resets both start a new interval).
struct EnvelopeCheck {
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0.0;  // max ||e2|| / envelope
};
std::vector<EnvelopeCheck> e2_envelope_check(const runtime::RunLog& log, const Assembled& assembled, double k);

/// Formula plus the atom geometry it refers to; enough to monitor a CSV trace.
std::string formula_json(const mtl::Formula& f, const mtl::AtomTable& atoms, double ts);
struct FormulaDocument {
  mtl::AtomTable atoms;
  mtl::Formula formula = mtl::Formula::truth();
  double ts = 0.5;
};
FormulaDocument parse_formula_json(const std::string& text);

/// Deterministic summary of a run (no wall-clock values).
std::string metrics_json(const runtime::RunLog& log, const ScenarioConfig& config, const Assembled& assembled);
std::string events_json(const runtime::RunLog& log);
std::string timing_json(const runtime::RunLog& log);

/// Writes trajectories.csv, metrics.json, events.json, timing.json, formula.json and
/// plotdata/{e1,e2,inputs,paths}.csv into `dir` (created if missing).
void write_bundle(const std::filesystem::path& dir, const runtime::RunLog& log, const ScenarioConfig& config,
                  const Assembled& assembled);

/// One-line human summary: status, termination index, effort, max ||e1||, verdict.
std::string summary_line(const runtime::RunLog& log);

}  // namespace relay_mtl::scenario

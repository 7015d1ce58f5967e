#include "relay_mtl/scenario/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "relay_mtl/analysis/dwell.hpp"
#include "relay_mtl/mtl/parse.hpp"

namespace relay_mtl::scenario {

using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void row(std::string& out, int step, double time, const std::string& agent, const std::string& kind, const Vector& v) {
  out += std::to_string(step);
  out += ',';
  out += num(time);
  out += ',';
  out += agent;
  out += ',';
  out += kind;
  for (int c = 0; c < kCsvValueColumns; ++c) {
    out += ',';
    if (c < v.size()) out += num(v(c));
  }
  out += '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

ojson vec(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector to_vector(const ojson& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

const char* trigger_name(sim::ServiceTrigger t) { return t == sim::ServiceTrigger::Relay ? "relay" : "goal_region"; }

double max_e1(const runtime::RunLog& log, std::size_t i) {
  double m = 0.0;
  for (const auto& s : log.steps) m = std::max(m, s.e1[i]);
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string trajectories_header() {
  std::string h = "step,time,agent,kind";
  for (int c = 1; c <= kCsvValueColumns; ++c) h += ",x" + std::to_string(c);
  return h + "\n";
}

std::string trajectories_csv(const runtime::RunLog& log) {
  std::string out = trajectories_header();
  for (const auto& s : log.steps) {
    const double t = log.ts * s.index;
    row(out, s.index, t, "relay", "state", s.x0);
    row(out, s.index, t, "relay", "position", s.y0);
    if (s.u0.size() > 0) row(out, s.index, t, "relay", "input", s.u0);
    for (std::size_t i = 0; i < log.explorer_names.size(); ++i) {
      const std::string& name = log.explorer_names[i];
      row(out, s.index, t, name, "state", s.x[i]);
      row(out, s.index, t, name, "estimate", s.x_hat[i]);
      row(out, s.index, t, name, "position", s.y[i]);
      row(out, s.index, t, name, "estimate_position", s.y_hat[i]);
    }
  }
  return out;
}

mtl::Trace trace_from_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line + "\n" != trajectories_header()) throw std::runtime_error("trajectories: unexpected header");
  std::map<std::string, std::map<int, Vector>> signals;
  std::map<int, double> times;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto parts = split(line);
    const std::string where = "trajectories line " + std::to_string(lineno);
    if (parts.size() != static_cast<std::size_t>(4 + kCsvValueColumns)) throw std::runtime_error(where + ": wrong column count");
    const std::string& agent = parts[2];
    const std::string& kind = parts[3];
    std::string signal;
    if (agent == "relay" && kind == "position") {
      signal = "relay";
    } else if (agent != "relay" && kind == "position") {
      signal = agent;
    } else if (agent != "relay" && kind == "estimate_position") {
      signal = runtime::estimate_signal(agent);
    } else {
      continue;
    }
    int step = 0;
    std::vector<double> values;
    try {
      std::size_t used = 0;
      step = std::stoi(parts[0], &used);
      if (used != parts[0].size()) throw std::invalid_argument("step");
      times[step] = std::stod(parts[1]);
      for (std::size_t c = 4; c < parts.size() && !parts[c].empty(); ++c) values.push_back(std::stod(parts[c]));
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": malformed number");
    }
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t c = 0; c < values.size(); ++c) v(static_cast<Eigen::Index>(c)) = values[c];
    if (!signals[signal].emplace(step, v).second) throw std::runtime_error(where + ": duplicate sample");
  }
  if (signals.empty()) return mtl::Trace(1.0);
  double ts = 1.0;
  if (times.size() >= 2) ts = std::next(times.begin())->second - times.begin()->second;
  mtl::Trace tr(ts);
  for (auto& [name, samples] : signals) {
    std::vector<Vector> seq;
    int expect = 0;
    for (auto& [step, v] : samples) {
      if (step != expect++) throw std::runtime_error("trajectories: signal " + name + " has missing steps");
      seq.push_back(v);
    }
    tr.set_signal(name, std::move(seq));
  }
  return tr;
}

std::vector<EnvelopeCheck> e2_envelope_check(const runtime::RunLog& log, const Assembled& assembled, double k) {
  const Vector& x_g = assembled.problem.world.config().x_g;
  std::vector<EnvelopeCheck> out(log.explorer_names.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& b = assembled.bounds.explorers[i];
    std::vector<char> reset(log.steps.size(), 0);
    if (!reset.empty()) reset[0] = 1;
    for (const auto& s : log.services) {
      if (static_cast<std::size_t>(s.explorer) == i && static_cast<std::size_t>(s.index) < reset.size()) {
        reset[static_cast<std::size_t>(s.index)] = 1;
      }
    }
    int last = -1;
    double e2_at = 0.0;
    for (std::size_t j = 0; j < log.steps.size(); ++j) {
      const auto& st = log.steps[j];
      if (last >= 0) {
        const double env = analysis::e2_envelope(b.lambda_min_p, b.lambda_max_p, k, e2_at, log.ts * (st.index - last));
        ++out[i].samples;
        if (st.e2[i] > env + 1e-9) ++out[i].violations;
        if (env > 0.0) out[i].worst_ratio = std::max(out[i].worst_ratio, st.e2[i] / env);
      }
      if (reset[j]) {
        // The estimate is reset to the true state at this sample.
        last = st.index;
        e2_at = (x_g - st.x[i]).norm();
      }
    }
  }
  return out;
}

std::string formula_json(const mtl::Formula& f, const mtl::AtomTable& atoms, double ts) {
  ojson j;
  j["sampling_period"] = ts;
  j["formula"] = mtl::to_string(f);
  ojson list = ojson::array();
  for (const auto& [id, a] : atoms) {
    ojson e;
    e["id"] = id;
    if (const auto* ball = std::get_if<mtl::NormBall>(&a->geometry)) {
      e["kind"] = "ball";
      e["subject"] = ball->subject;
      if (ball->center_signal.empty()) {
        e["center"] = vec(ball->center);
      } else {
        e["center_signal"] = ball->center_signal;
      }
      e["radius"] = ball->radius;
    } else {
      const auto& box = std::get<mtl::BoxRegion>(a->geometry);
      e["kind"] = "box";
      e["subject"] = box.subject;
      e["lo"] = vec(box.lo);
      e["hi"] = vec(box.hi);
    }
    list.push_back(e);
  }
  j["atoms"] = list;
  return j.dump(2) + "\n";
}

FormulaDocument parse_formula_json(const std::string& text) {
  FormulaDocument doc;
  try {
    const ojson j = ojson::parse(text);
    doc.ts = j.value("sampling_period", 1.0);
    for (const auto& e : j.at("atoms")) {
      mtl::AtomicPredicate p;
      p.id = e.at("id").get<std::string>();
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "ball") {
        mtl::NormBall b;
        b.subject = e.at("subject").get<std::string>();
        if (e.contains("center_signal")) {
          b.center_signal = e.at("center_signal").get<std::string>();
        } else {
          b.center = to_vector(e.at("center"));
        }
        b.radius = e.at("radius").get<double>();
        p.geometry = b;
      } else if (kind == "box") {
        p.geometry = mtl::BoxRegion{e.at("subject").get<std::string>(), to_vector(e.at("lo")), to_vector(e.at("hi"))};
      } else {
        throw std::runtime_error("formula document: unknown atom kind '" + kind + "'");
      }
      p.validate();
      const std::string id = p.id;
      doc.atoms[id] = std::make_shared<mtl::AtomicPredicate>(std::move(p));
    }
    doc.formula = mtl::parse_formula(j.at("formula").get<std::string>(), doc.atoms);
  } catch (const ojson::exception& e) {
    throw std::runtime_error(std::string("formula document: ") + e.what());
  }
  return doc;
}

std::string metrics_json(const runtime::RunLog& log, const ScenarioConfig& config, const Assembled& assembled) {
  ojson j;
  j["scenario"] = config.name;
  j["seed"] = config.seed;
  j["status"] = runtime::to_string(log.status);
  j["sampling_period"] = log.ts;
  j["horizon"] = log.horizon;
  j["steps"] = log.steps.size();
  j["termination_index"] = log.termination_index ? ojson(*log.termination_index) : ojson(nullptr);
  j["cumulative_effort"] =
      log.status == runtime::RunStatus::Completed ? ojson(runtime::cumulative_effort(log)) : ojson(nullptr);
  j["formula"] = mtl::to_string(assembled.formula);
  j["verdict"] = {{"weak", log.verdict.weak}, {"strong", log.verdict.strong}};

  const auto& b = assembled.bounds;
  j["termination_conditions"] = {{"v_t_ok", b.v_t_ok},
                                 {"eta_ok", b.eta_ok},
                                 {"ultimate_ok", b.ultimate_ok},
                                 {"dwell_steps_ok", b.dwell_steps_ok},
                                 {"termination_ok", b.termination_ok},
                                 {"forced", config.force && !b.termination_ok},
                                 {"failures", b.failures}};

  const auto env = e2_envelope_check(log, assembled, config.k);
  ojson ex = ojson::array();
  for (std::size_t i = 0; i < log.explorer_names.size(); ++i) {
    const auto& eb = b.explorers[i];
    const int gap = runtime::max_service_gap(log, static_cast<int>(i));
    const double e1 = max_e1(log, i);
    ojson e;
    e["name"] = log.explorer_names[i];
    e["kappa"] = eb.kappa;
    e["dwell_time"] = eb.tau;
    e["dwell_steps"] = eb.n_steps;
    e["lambda_rho"] = eb.bound_rho;
    e["lambda_rho_star"] = eb.bound_rho_star;
    e["service_times"] = runtime::service_times(log, static_cast<int>(i));
    e["max_service_gap"] = gap;
    e["gaps_within_dwell"] = gap <= eb.n_steps;
    e["max_e1"] = e1;
    e["e1_within_v_t"] = e1 <= config.v_t + 1e-6;
    e["e2_envelope_samples"] = env[i].samples;
    e["e2_envelope_violations"] = env[i].violations;
    ex.push_back(e);
  }
  j["explorers"] = ex;

  long nodes = 0;
  int max_binaries = 0, checks = 0, violations = 0, plans_ok = 0;
  std::map<std::string, int> reasons;
  for (const auto& r : log.resolves) {
    nodes += r.stats.nodes;
    max_binaries = std::max(max_binaries, r.binaries);
    checks += r.ball_checks;
    violations += r.ball_violations;
    plans_ok += r.plan_weakly_satisfies ? 1 : 0;
    ++reasons[runtime::to_string(r.reason)];
  }
  j["resolves"] = {{"count", log.resolves.size()},
                   {"by_reason", reasons},
                   {"nodes", nodes},
                   {"max_binaries", max_binaries},
                   {"plans_weakly_satisfying", plans_ok}};
  j["service_audit"] = {{"checks", checks}, {"violations", violations}};
  j["abort"] = log.abort ? ojson(log.abort->message) : ojson(nullptr);
  return j.dump(2) + "\n";
}

std::string events_json(const runtime::RunLog& log) {
  ojson j;
  ojson services = ojson::array();
  for (const auto& s : log.services) {
    services.push_back({{"index", s.index},
                        {"time", log.ts * s.index},
                        {"explorer", log.explorer_names.at(static_cast<std::size_t>(s.explorer))},
                        {"trigger", trigger_name(s.trigger)}});
  }
  j["services"] = services;
  ojson resolves = ojson::array();
  for (const auto& r : log.resolves) {
    ojson names = ojson::array();
    for (int e : r.serviced) names.push_back(log.explorer_names.at(static_cast<std::size_t>(e)));
    resolves.push_back({{"id", r.id},
                        {"index", r.index},
                        {"reason", runtime::to_string(r.reason)},
                        {"serviced", names},
                        {"variables", r.variables},
                        {"binaries", r.binaries},
                        {"constraints", r.constraints},
                        {"status", milp::to_string(r.status)},
                        {"objective", r.objective},
                        {"nodes", r.stats.nodes},
                        {"simplex_iterations", r.stats.simplex_iterations},
                        {"ball_checks", r.ball_checks},
                        {"ball_violations", r.ball_violations},
                        {"plan_weakly_satisfies", r.plan_weakly_satisfies}});
  }
  j["resolves"] = resolves;
  ojson applied = ojson::array();
  for (const auto& s : log.steps) {
    if (s.u0.size() > 0) applied.push_back({{"index", s.index}, {"solve", s.solve_id}});
  }
  j["applied_inputs"] = applied;
  if (log.abort) {
    ojson x_hat = ojson::array();
    for (const auto& v : log.abort->x_hat) x_hat.push_back(vec(v));
    j["abort"] = {{"index", log.abort->index},
                  {"message", log.abort->message},
                  {"specialized_formula", log.abort->specialized_formula},
                  {"x0", vec(log.abort->x0)},
                  {"x_hat", x_hat}};
  } else {
    j["abort"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string timing_json(const runtime::RunLog& log) {
  ojson j;
  j["wall_seconds"] = log.wall_seconds;
  ojson r = ojson::array();
  for (const auto& s : log.resolves) r.push_back({{"id", s.id}, {"wall_seconds", s.stats.wall_seconds}});
  j["resolves"] = r;
  return j.dump(2) + "\n";
}

void write_bundle(const std::filesystem::path& dir, const runtime::RunLog& log, const ScenarioConfig& config,
                  const Assembled& assembled) {
  std::filesystem::create_directories(dir / "plotdata");
  write_file(dir / "trajectories.csv", trajectories_csv(log));
  write_file(dir / "metrics.json", metrics_json(log, config, assembled));
  write_file(dir / "events.json", events_json(log));
  write_file(dir / "timing.json", timing_json(log));
  write_file(dir / "formula.json", formula_json(assembled.formula, assembled.atoms, log.ts));

  std::string e1 = "step,time", e2 = "step,time", paths = "step,time,relay_x,relay_y,relay_z";
  for (const auto& n : log.explorer_names) {
    e1 += "," + n;
    e2 += "," + n;
    paths += "," + n + "_x," + n + "_y," + n + "_hat_x," + n + "_hat_y";
  }
  e1 += "\n";
  e2 += "\n";
  paths += "\n";
  std::string inputs = "step,time,u1,u2,u3,u4,norm\n";
  for (const auto& s : log.steps) {
    const std::string head = std::to_string(s.index) + "," + num(log.ts * s.index);
    e1 += head;
    e2 += head;
    paths += head + "," + num(s.y0(0)) + "," + num(s.y0(1)) + "," + num(s.y0(2));
    for (std::size_t i = 0; i < log.explorer_names.size(); ++i) {
      e1 += "," + num(s.e1[i]);
      e2 += "," + num(s.e2[i]);
      paths += "," + num(s.y[i](0)) + "," + num(s.y[i](1)) + "," + num(s.y_hat[i](0)) + "," + num(s.y_hat[i](1));
    }
    e1 += "\n";
    e2 += "\n";
    paths += "\n";
    if (s.u0.size() > 0) {
      inputs += head;
      for (Eigen::Index c = 0; c < s.u0.size(); ++c) inputs += "," + num(s.u0(c));
      inputs += "," + num(s.u0.norm()) + "\n";
    }
  }
  write_file(dir / "plotdata" / "e1.csv", e1);
  write_file(dir / "plotdata" / "e2.csv", e2);
  write_file(dir / "plotdata" / "inputs.csv", inputs);
  write_file(dir / "plotdata" / "paths.csv", paths);
}

std::string summary_line(const runtime::RunLog& log) {
  std::ostringstream o;
  o << "status=" << runtime::to_string(log.status);
  o << " termination=" << (log.termination_index ? std::to_string(*log.termination_index) : std::string("none"));
  if (log.status == runtime::RunStatus::Completed) o << " effort=" << num(runtime::cumulative_effort(log));
  double e1 = 0.0;
  for (std::size_t i = 0; i < log.explorer_names.size(); ++i) e1 = std::max(e1, max_e1(log, i));
  o << " max_e1=" << num(e1);
  o << " weak=" << (log.verdict.weak ? "true" : "false") << " strong=" << (log.verdict.strong ? "true" : "false");
  o << " solves=" << log.resolves.size();
  return o.str();
}

}  // namespace relay_mtl::scenario

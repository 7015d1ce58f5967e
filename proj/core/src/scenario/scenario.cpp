#include "relay_mtl/scenario/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "relay_mtl/mtl/parse.hpp"
#include "relay_mtl/mtl/rewrite.hpp"

namespace relay_mtl::scenario {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) throw ScenarioError(ptr_, "expected an object");
  }

  std::string at(const std::string& key) const { return ptr_ + "/" + escape(key); }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ScenarioError(at(key), "required value is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) throw ScenarioError(at(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ScenarioError(at(key), "expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  long long integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) throw ScenarioError(at(key), "expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : mark(key, fallback);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return mark(key, fallback);
    const json& v = get(key);
    if (!v.is_boolean()) throw ScenarioError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) throw ScenarioError(at(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : mark(key, fallback);
  }

  Vector vector(const std::string& key, int size) {
    const json& v = get(key);
    if (!v.is_array() || static_cast<int>(v.size()) != size) {
      throw ScenarioError(at(key), "expected an array of " + std::to_string(size) + " numbers");
    }
    Vector out(size);
    for (int k = 0; k < size; ++k) {
      if (!v[static_cast<std::size_t>(k)].is_number()) throw ScenarioError(at(key) + "/" + std::to_string(k), "expected a number");
      out(k) = v[static_cast<std::size_t>(k)].get<double>();
    }
    return out;
  }

  // Rejects unknown keys before any value is read, so a typo is reported as such rather than
  // as the required key it was meant to be.
  void only(std::initializer_list<const char*> known) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
        throw ScenarioError(at(it.key()), "unknown key");
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ScenarioError(at(it.key()), "unknown key");
    }
  }

 private:
  template <typename T>
  T mark(const std::string& key, T v) {
    seen_.insert(key);
    return v;
  }

  const json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

bool identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return s != "true" && s != "false" && s != "inf" && s != "F" && s != "G" && s != "U";
}

void require(bool ok, const std::string& ptr, const std::string& message) {
  if (!ok) throw ScenarioError(ptr, message);
}

ojson vec(const Vector& v) {
  ojson a = ojson::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("", std::string("not valid JSON: ") + e.what());
  }
  Obj root(doc, "");
  root.only({"schema", "name", "sampling_period", "horizon", "comm_radius", "goal_radius", "eta", "v_t", "k", "goal",
             "relay", "explorers", "regions", "formula", "auto_dwell_formula", "seed", "max_steps", "substeps",
             "encoder", "solver", "force"});
  ScenarioConfig c;
  const long long schema = root.integer("schema");
  require(schema == 1, "/schema", "unsupported schema version " + std::to_string(schema) + " (expected 1)");
  c.name = root.string("name", "");
  c.ts = root.number("sampling_period", c.ts);
  require(c.ts > 0.0, "/sampling_period", "must be positive");
  const long long n = root.integer("horizon", c.horizon);
  require(n >= 1 && n <= 1000, "/horizon", "must lie in [1, 1000]");
  c.horizon = static_cast<int>(n);
  c.comm_radius = root.number("comm_radius", c.comm_radius);
  require(c.comm_radius > 0.0, "/comm_radius", "must be positive");
  c.goal_radius = root.number("goal_radius", c.goal_radius);
  require(c.goal_radius > 0.0, "/goal_radius", "must be positive");
  c.eta = root.number("eta", c.eta);
  require(c.eta >= 0.0 && c.eta < c.comm_radius, "/eta", "must lie in [0, comm_radius)");
  c.v_t = root.number("v_t", c.v_t);
  require(c.v_t > 0.0, "/v_t", "must be positive");
  c.k = root.number("k", c.k);
  require(c.k > 0.0, "/k", "must be positive");
  c.goal = root.vector("goal", 2);

  {
    Obj relay(root.get("relay"), "/relay");
    relay.only({"initial_position", "u_min", "u_max", "gravity"});
    c.relay_position = relay.vector("initial_position", 3);
    c.u_min = relay.vector("u_min", 4);
    c.u_max = relay.vector("u_max", 4);
    for (int k = 0; k < 4; ++k) {
      require(c.u_min(k) < c.u_max(k), "/relay/u_max/" + std::to_string(k), "must exceed u_min");
    }
    c.gravity = relay.number("gravity", c.gravity);
    require(c.gravity > 0.0, "/relay/gravity", "must be positive");
    relay.finish();
  }

  const json& ex = root.get("explorers");
  require(ex.is_array() && !ex.empty(), "/explorers", "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const std::string ptr = "/explorers/" + std::to_string(i);
    Obj e(ex[i], ptr);
    e.only({"name", "initial_position", "d_bar"});
    ExplorerSpec spec;
    spec.name = e.string("name");
    require(identifier(spec.name), ptr + "/name", "must be an identifier");
    require(names.insert(spec.name).second, ptr + "/name", "duplicate explorer name");
    spec.initial_position = e.vector("initial_position", 3);
    require(spec.initial_position(2) == 0.0, ptr + "/initial_position/2", "explorers move in the plane z = 0");
    spec.d_bar = e.number("d_bar");
    require(spec.d_bar >= 0.0, ptr + "/d_bar", "must be non-negative");
    e.finish();
    c.explorers.push_back(spec);
  }

  const json& regions = root.get("regions");
  require(regions.is_object(), "/regions", "expected an object");
  for (auto it = regions.begin(); it != regions.end(); ++it) {
    const std::string ptr = "/regions/" + escape(it.key());
    require(identifier(it.key()), ptr, "region name must be an identifier");
    Obj r(it.value(), ptr);
    r.only({"center", "size"});
    Region reg;
    reg.center = r.vector("center", 3);
    reg.size = r.vector("size", 3);
    for (int k = 0; k < 3; ++k) require(reg.size(k) > 0.0, ptr + "/size/" + std::to_string(k), "must be positive");
    r.finish();
    c.regions[it.key()] = reg;
  }

  c.formula = root.string("formula");
  c.auto_dwell_formula = root.boolean("auto_dwell_formula", c.auto_dwell_formula);
  const long long seed = root.integer("seed", 1);
  require(seed >= 0, "/seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  const long long steps = root.integer("max_steps", c.max_steps);
  require(steps >= 0 && steps <= 1000000, "/max_steps", "must lie in [0, 1000000]");
  c.max_steps = static_cast<int>(steps);
  const long long sub = root.integer("substeps", c.substeps);
  require(sub >= 1 && sub <= 10000, "/substeps", "must lie in [1, 10000]");
  c.substeps = static_cast<int>(sub);

  if (root.has("encoder")) {
    Obj e(root.get("encoder"), "/encoder");
    e.only({"big_m", "box_margin", "ball_margin", "tighten_big_m"});
    c.encoder.big_m = e.number("big_m", c.encoder.big_m);
    require(c.encoder.big_m > 0.0, "/encoder/big_m", "must be positive");
    c.encoder.box_margin = e.number("box_margin", c.encoder.box_margin);
    require(c.encoder.box_margin >= 0.0, "/encoder/box_margin", "must be non-negative");
    c.encoder.ball_margin = e.number("ball_margin", c.encoder.ball_margin);
    require(c.encoder.ball_margin >= 0.0 && c.encoder.ball_margin < 1.0, "/encoder/ball_margin", "must lie in [0, 1)");
    c.encoder.tighten_big_m = e.boolean("tighten_big_m", c.encoder.tighten_big_m);
    e.finish();
  }
  if (root.has("solver")) {
    Obj s(root.get("solver"), "/solver");
    s.only({"backend", "integrality_tolerance", "relative_gap", "node_limit", "time_limit_seconds", "root_dive"});
    c.solver.backend = s.string("backend", c.solver.backend);
    c.solver.integrality_tolerance = s.number("integrality_tolerance", c.solver.integrality_tolerance);
    c.solver.relative_gap = s.number("relative_gap", c.solver.relative_gap);
    c.solver.node_limit = static_cast<long>(s.integer("node_limit", c.solver.node_limit));
    c.solver.time_limit_seconds = s.number("time_limit_seconds", c.solver.time_limit_seconds);
    c.solver.root_dive = s.boolean("root_dive", c.solver.root_dive);
    s.finish();
    require(c.solver.backend == "builtin" || c.solver.backend.rfind("external:", 0) == 0, "/solver/backend",
            "must be \"builtin\" or \"external:<command>\"");
    try {
      c.solver.validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("/solver", e.what());
    }
  }
  c.force = root.boolean("force", false);
  root.finish();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_json(const ScenarioConfig& c) {
  ojson j;
  j["schema"] = 1;
  j["name"] = c.name;
  j["sampling_period"] = c.ts;
  j["horizon"] = c.horizon;
  j["comm_radius"] = c.comm_radius;
  j["goal_radius"] = c.goal_radius;
  j["eta"] = c.eta;
  j["v_t"] = c.v_t;
  j["k"] = c.k;
  j["goal"] = vec(c.goal);
  j["relay"] = {{"initial_position", vec(c.relay_position)},
                {"u_min", vec(c.u_min)},
                {"u_max", vec(c.u_max)},
                {"gravity", c.gravity}};
  ojson ex = ojson::array();
  for (const auto& e : c.explorers) {
    ex.push_back({{"name", e.name}, {"initial_position", vec(e.initial_position)}, {"d_bar", e.d_bar}});
  }
  j["explorers"] = ex;
  ojson regions = ojson::object();
  for (const auto& [name, r] : c.regions) regions[name] = {{"center", vec(r.center)}, {"size", vec(r.size)}};
  j["regions"] = regions;
  j["formula"] = c.formula;
  j["auto_dwell_formula"] = c.auto_dwell_formula;
  j["seed"] = c.seed;
  j["max_steps"] = c.max_steps;
  j["substeps"] = c.substeps;
  j["encoder"] = {{"big_m", c.encoder.big_m},
                  {"box_margin", c.encoder.box_margin},
                  {"ball_margin", c.encoder.ball_margin},
                  {"tighten_big_m", c.encoder.tighten_big_m}};
  j["solver"] = {{"backend", c.solver.backend},
                 {"integrality_tolerance", c.solver.integrality_tolerance},
                 {"relative_gap", c.solver.relative_gap},
                 {"node_limit", c.solver.node_limit},
                 {"time_limit_seconds", c.solver.time_limit_seconds},
                 {"root_dive", c.solver.root_dive}};
  j["force"] = c.force;
  return j.dump(2) + "\n";
}

ScenarioConfig desk_scale(const ScenarioConfig& c) {
  ScenarioConfig d = c;
  if (!d.name.empty()) d.name += "-desk";
  d.horizon = 10;
  d.goal = c.goal / 10.0;
  d.relay_position = c.relay_position / 10.0;
  for (auto& e : d.explorers) e.initial_position /= 10.0;
  // Linear relay dynamics: a tenth of the distance needs a tenth of the input.
  d.u_min = c.u_min / 10.0;
  d.u_max = c.u_max / 10.0;
  for (auto& [name, r] : d.regions) {
    r.center /= 10.0;
    r.size /= 10.0;
  }
  return d;
}

std::vector<std::string> builtin_names() {
  return {"scenario1-phi1", "scenario1-phi2", "scenario1-phi3", "scenario2-phi1", "scenario2-phi2", "scenario2-phi3"};
}

ScenarioConfig builtin(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.ts = 0.5;
  c.horizon = 20;
  c.comm_radius = 5.0;
  c.goal_radius = 5.0;
  c.eta = 4.0;
  c.v_t = 1.0;
  c.k = 0.1;
  c.goal = Vector::Zero(2);
  c.relay_position = (Vector(3) << -25, -150, 5).finished();
  c.u_min = Vector::Constant(4, -500.0);
  c.u_max = Vector::Constant(4, 500.0);
  c.explorers = {{"e1", (Vector(3) << -100, -100, 0).finished(), 0.04},
                 {"e2", (Vector(3) << 100, 150, 0).finished(), 0.03},
                 {"e3", (Vector(3) << 150, -150, 0).finished(), 0.02}};
  c.regions["g1"] = {(Vector(3) << -100, 50, 2.5).finished(), (Vector(3) << 10, 10, 5).finished()};
  c.regions["g2"] = {(Vector(3) << 125, 0, 2.5).finished(), (Vector(3) << 10, 10, 5).finished()};
  c.regions["d"] = {(Vector(3) << 0, 0, 7).finished(), (Vector(3) << 300, 300, 6).finished()};
  c.seed = 7;
  c.max_steps = 400;
  // The reference parameters fail the ultimate-bound condition; run anyway and report it.
  c.force = true;
  const std::vector<std::string> names = builtin_names();
  if (name == "scenario1-phi1" || name == "scenario1-phi2" || name == "scenario1-phi3") {
    const int window = name.back() == '1' ? 20 : name.back() == '2' ? 10 : 6;
    c.formula = "G F[0," + std::to_string(window) + "] (g1 | g2) & G d";
    return c;
  }
  if (name == "scenario2-phi1" || name == "scenario2-phi2" || name == "scenario2-phi3") {
    c.regions["e"] = {(Vector(3) << 0, 0, 6).finished(), (Vector(3) << 75, 75, 4).finished()};
    c.formula = "G F[0,6] (g1 | g2) & G d & !F G[0," + std::string(1, name.back()) + "] e";
    return c;
  }
  throw std::invalid_argument("unknown builtin scenario '" + name + "'");
}

std::string service_atom(const std::string& explorer) { return "serve_" + explorer; }

Assembled assemble(const ScenarioConfig& c) {
  const sim::RelayModel relay = sim::hover_relay_model(c.u_min, c.u_max, c.gravity);
  std::vector<sim::ExplorerModel> models;
  std::vector<Vector> explorer_x;
  for (const auto& e : c.explorers) {
    models.push_back(sim::double_integrator_explorer(e.name, e.d_bar, c.k));
    explorer_x.push_back((Vector(4) << e.initial_position(0), e.initial_position(1), 0, 0).finished());
  }
  sim::WorldConfig wc;
  wc.ts = c.ts;
  wc.substeps = c.substeps;
  wc.x_g = (Vector(4) << c.goal(0), c.goal(1), 0, 0).finished();
  wc.comm_radius = c.comm_radius;
  wc.goal_radius = c.goal_radius;
  wc.eta = c.eta;
  sim::World world(relay, models, wc);
  analysis::BoundReport bounds = analysis::validate_config(world, c.v_t, c.k);
  if (!bounds.termination_ok && !c.force) {
    std::string msg = "finite-termination conditions fail";
    for (const auto& f : bounds.failures) msg += "; " + f;
    throw ScenarioError("", msg + " (set \"force\": true to run anyway)");
  }

  mtl::AtomTable atoms;
  for (const auto& [name, r] : c.regions) {
    atoms[name] = std::make_shared<mtl::AtomicPredicate>(
        mtl::AtomicPredicate{name, mtl::BoxRegion{"relay", r.center - r.size / 2.0, r.center + r.size / 2.0}});
  }
  std::vector<mtl::Formula> dwell;
  for (std::size_t i = 0; i < c.explorers.size(); ++i) {
    const std::string id = service_atom(c.explorers[i].name);
    if (atoms.count(id)) throw ScenarioError("/regions/" + id, "name is reserved for the service atom");
    auto atom = std::make_shared<mtl::AtomicPredicate>(
        mtl::AtomicPredicate{id, mtl::NormBall{"relay", runtime::estimate_signal(c.explorers[i].name), Vector(), c.eta}});
    atoms[id] = atom;
    const int n = bounds.explorers[i].n_steps;
    if (n < 1) {
      throw ScenarioError("/explorers/" + std::to_string(i), "dwell time is shorter than one sampling period");
    }
    const std::optional<int> hi = n == std::numeric_limits<int>::max() ? std::nullopt : std::optional<int>(n - 1);
    dwell.push_back(mtl::Formula::always(mtl::TimeInterval::unbounded(),
                                         mtl::Formula::eventually(mtl::TimeInterval(0, hi), mtl::Formula::atom(atom))));
  }
  mtl::Formula practical = mtl::Formula::truth();
  try {
    practical = mtl::parse_formula(c.formula, atoms);
  } catch (const mtl::ParseError& e) {
    throw ScenarioError("/formula", e.what());
  }
  const mtl::Formula dwell_part = c.auto_dwell_formula ? mtl::fold_and(dwell) : mtl::Formula::truth();
  const mtl::Formula full = mtl::fold_and({dwell_part, practical});

  const Vector x0 = (Vector(8) << c.relay_position(0), c.relay_position(1), c.relay_position(2), 0, 0, 0, 0, 0).finished();
  runtime::SynthesisProblem problem{world, x0, explorer_x, full, c.horizon, c.max_steps, c.seed, c.encoder, c.solver, {}};
  return Assembled{bounds, atoms, practical, dwell_part, full, problem};
}

}  // namespace relay_mtl::scenario

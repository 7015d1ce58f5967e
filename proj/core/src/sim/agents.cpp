#include "relay_mtl/sim/agents.hpp"

#include <stdexcept>

namespace relay_mtl::sim {

void RelayModel::validate() const {
  const auto l = a0.rows();
  if (a0.cols() != l || b0.rows() != l || c0.cols() != l) {
    throw control::DimensionError("relay model: inconsistent A0/B0/C0 dimensions");
  }
  if (u_min.size() != b0.cols() || u_max.size() != b0.cols()) {
    throw control::DimensionError("relay model: input bounds must have one entry per input");
  }
  for (Eigen::Index c = 0; c < u_min.size(); ++c) {
    if (!(u_min(c) < u_max(c))) {
      throw std::invalid_argument("relay model: u_min must be below u_max on channel " + std::to_string(c));
    }
  }
}

RelayModel hover_relay_model(const Vector& u_min, const Vector& u_max, double gravity) {
  RelayModel m;
  m.a0 = Matrix::Zero(8, 8);
  m.a0(0, 3) = 1.0;       // x1' = x1dot
  m.a0(1, 4) = 1.0;       // x2' = x2dot
  m.a0(3, 6) = gravity;   // x1'' = g beta
  m.a0(4, 5) = -gravity;  // x2'' = -g alpha
  m.b0 = Matrix::Zero(8, 4);
  m.b0(2, 0) = 1.0;  // x3' = u1
  m.b0(5, 1) = 1.0;  // alpha' = u2
  m.b0(6, 2) = 1.0;  // beta' = u3
  m.b0(7, 3) = 1.0;  // gamma' = u4
  m.c0 = Matrix::Zero(3, 8);
  m.c0(0, 0) = m.c0(1, 1) = m.c0(2, 2) = 1.0;
  m.u_min = u_min;
  m.u_max = u_max;
  m.validate();
  return m;
}

void ExplorerModel::validate() const {
  const auto m = a.rows();
  if (a.cols() != m || b.rows() != m || c.cols() != m || p.rows() != m || p.cols() != m) {
    throw control::DimensionError("explorer '" + name + "': inconsistent A/B/C/P dimensions");
  }
  if (!(d_bar >= 0.0)) throw std::invalid_argument("explorer '" + name + "': d_bar must be non-negative");
}

ExplorerModel double_integrator_explorer(const std::string& name, double d_bar, double k) {
  ExplorerModel e;
  e.name = name;
  e.a = Matrix::Zero(4, 4);
  e.a(0, 2) = e.a(1, 3) = 1.0;
  e.b = Matrix::Zero(4, 2);
  e.b(2, 0) = e.b(3, 1) = 1.0;
  e.c = Matrix::Zero(3, 4);
  e.c(0, 0) = e.c(1, 1) = 1.0;
  e.p = control::solve_care(e.a, e.b, k);
  e.d_bar = d_bar;
  e.validate();
  return e;
}

Vector explorer_control(const Vector& x_hat, const Vector& x_g, const ExplorerModel& model) {
  return model.b.transpose() * (model.p * (x_g - x_hat));
}

Vector observer_derivative(const Vector& x_hat, const Vector& u, const ExplorerModel& model,
                           const Vector& x_g) {
  return model.a * (x_hat - x_g) + model.b * u;
}

Vector sample_disturbance(Rng& rng, double d_bar, Eigen::Index dim) {
  Vector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = (rng.uniform01() - 0.5) * d_bar;
  return d;
}

void WorldConfig::validate() const {
  if (!(ts > 0.0)) throw std::invalid_argument("sampling period must be positive");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (!(goal_radius > 0.0)) throw std::invalid_argument("R_f must be positive");
  if (!(eta >= 0.0 && eta < comm_radius)) throw std::invalid_argument("eta must lie in [0, R)");
}

World::World(RelayModel relay, std::vector<ExplorerModel> explorers, WorldConfig config)
    : relay_(std::move(relay)), explorers_(std::move(explorers)), config_(std::move(config)) {
  relay_.validate();
  config_.validate();
  for (const auto& e : explorers_) {
    e.validate();
    if (e.c.rows() != relay_.c0.rows()) {
      throw control::DimensionError("explorer '" + e.name + "' output dimension differs from relay");
    }
    if (config_.x_g.size() != e.a.rows()) {
      throw control::DimensionError("goal state dimension differs from explorer '" + e.name + "'");
    }
  }
  relay_d_ = control::zoh_discretize(relay_.a0, relay_.b0, config_.ts);
}

WorldState World::initial_state(const Vector& x0, const std::vector<Vector>& explorer_x) const {
  if (x0.size() != relay_.a0.rows()) throw control::DimensionError("relay initial state has wrong size");
  if (explorer_x.size() != explorers_.size()) throw std::invalid_argument("one initial state per explorer");
  WorldState s;
  s.x0 = x0;
  for (std::size_t i = 0; i < explorers_.size(); ++i) {
    if (explorer_x[i].size() != explorers_[i].a.rows()) {
      throw control::DimensionError("explorer '" + explorers_[i].name + "' initial state has wrong size");
    }
    s.explorers.push_back(ExplorerState{explorer_x[i], explorer_x[i], 0, false});
  }
  for (int i : detect_goal(s)) s.explorers[static_cast<std::size_t>(i)].in_goal = true;
  return s;
}

WorldState World::step(const WorldState& s, const Vector& u0, Rng& rng) const {
  if (u0.size() != relay_.b0.cols()) throw control::DimensionError("relay input has wrong size");
  WorldState out = s;
  out.x0 = relay_d_.ad * s.x0 + relay_d_.bd * u0;
  if (!out.x0.allFinite()) throw control::NumericalError("relay state diverged");
  const double dt = config_.ts / config_.substeps;
  const Vector& xg = config_.x_g;
  for (std::size_t i = 0; i < explorers_.size(); ++i) {
    const ExplorerModel& m = explorers_[i];
    const Eigen::Index n = m.a.rows();
    Vector z(2 * n);
    z << s.explorers[i].x, s.explorers[i].x_hat;
    for (int k = 0; k < config_.substeps; ++k) {
      const Vector d = sample_disturbance(rng, m.d_bar, n);
      auto flow = [&](double, const Vector& v) {
        const Vector x = v.head(n);
        const Vector xh = v.tail(n);
        const Vector u = explorer_control(xh, xg, m);
        Vector dv(2 * n);
        dv << m.a * x + m.b * u + d, observer_derivative(xh, u, m, xg);
        return dv;
      };
      const double t = config_.ts * s.t_index + dt * k;
      z = control::rk4_step(flow, z, t, dt);
    }
    if (!z.allFinite()) throw control::NumericalError("explorer '" + m.name + "' state diverged");
    out.explorers[i].x = z.head(n);
    out.explorers[i].x_hat = z.tail(n);
  }
  out.t_index = s.t_index + 1;
  for (std::size_t i = 0; i < explorers_.size(); ++i) out.explorers[i].in_goal = false;
  for (int i : detect_goal(out)) out.explorers[static_cast<std::size_t>(i)].in_goal = true;
  return out;
}

std::vector<int> World::detect_service(const WorldState& s) const {
  std::vector<int> w;
  const Vector y0 = relay_position(s);
  for (std::size_t i = 0; i < explorers_.size(); ++i) {
    if ((estimate_position(s, i) - y0).norm() <= config_.eta) w.push_back(static_cast<int>(i));
  }
  return w;
}

std::vector<int> World::detect_goal(const WorldState& s) const {
  std::vector<int> g;
  for (std::size_t i = 0; i < explorers_.size(); ++i) {
    if ((explorer_position(s, i) - goal_position(i)).norm() <= config_.goal_radius) g.push_back(static_cast<int>(i));
  }
  return g;
}

WorldState World::apply_service(const WorldState& s, const std::vector<int>& ids) const {
  WorldState out = s;
  for (int i : ids) {
    auto& e = out.explorers.at(static_cast<std::size_t>(i));
    e.x_hat = e.x;
    e.last_service_index = s.t_index;
  }
  return out;
}

bool World::all_in_goal(const WorldState& s) const { return detect_goal(s).size() == explorers_.size(); }

}  // namespace relay_mtl::sim

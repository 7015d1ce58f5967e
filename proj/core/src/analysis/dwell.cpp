#include "relay_mtl/analysis/dwell.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace relay_mtl::analysis {

double max_dwell_time(double s_max_a, double v_t, double kappa) {
  if (!(v_t > 0.0)) throw std::invalid_argument("max_dwell_time: V_T must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("max_dwell_time: kappa must be positive");
  if (s_max_a < 0.0) throw std::invalid_argument("max_dwell_time: S_max(A) must be non-negative");
  if (s_max_a == 0.0) return v_t / kappa;
  return std::log1p(v_t * s_max_a / kappa) / s_max_a;
}

int dwell_steps(double tau, double ts) {
  if (!(ts > 0.0)) throw std::invalid_argument("dwell_steps: Ts must be positive");
  return static_cast<int>(std::floor(tau / ts));
}

double phi_bound(double t, double t_s, double kappa, double s_max_a) {
  if (t < t_s) throw std::invalid_argument("phi_bound: t precedes the service time");
  const double dt = t - t_s;
  if (s_max_a == 0.0) return kappa * dt;
  return kappa / s_max_a * std::expm1(s_max_a * dt);
}

double e2_envelope(double lambda_min, double lambda_max, double k, double e2_at_service, double elapsed) {
  if (!(lambda_min > 0.0) || lambda_max < lambda_min) throw std::invalid_argument("e2_envelope: invalid spectrum");
  if (!(k > 0.0)) throw std::invalid_argument("e2_envelope: k must be positive");
  return std::sqrt(lambda_max / lambda_min) * e2_at_service * std::exp(-k * elapsed / (2.0 * lambda_max));
}

double ei_envelope(double lambda_min, double lambda_max, double k, double rho, double e0, double t) {
  if (!(lambda_min > 0.0) || lambda_max < lambda_min) throw std::invalid_argument("ei_envelope: invalid spectrum");
  if (!(k > 0.0)) throw std::invalid_argument("ei_envelope: k must be positive");
  const double decay = std::exp(-k * t / (2.0 * lambda_max));
  return ultimate_bound(lambda_min, lambda_max, k, rho) * (1.0 - decay) +
         std::sqrt(lambda_max / lambda_min) * e0 * decay;
}

double ultimate_bound(double lambda_min, double lambda_max, double k, double rho) {
  return lambda_max * rho / (lambda_min * k);
}

RhoValues rho_values(double d_bar, const Matrix& p, const Matrix& a, const Matrix& b, double v_t, double x_g_bar) {
  const double base = 2.0 * d_bar * control::smax(p) + 2.0 * control::smax(p * a) * x_g_bar;
  const Matrix pbbp = p * b * b.transpose() * p;
  return RhoValues{base + 2.0 * v_t * control::smax(pbbp), base};
}

BoundReport validate_config(const sim::World& world, double v_t, double k) {
  const auto& cfg = world.config();
  BoundReport r;
  r.v_t = v_t;
  r.x_g_bar = cfg.x_g.norm();
  r.eta_ok = cfg.eta >= 0.0 && cfg.eta < cfg.comm_radius;
  r.v_t_limit = std::numeric_limits<double>::infinity();
  r.ultimate_ok = true;
  r.dwell_steps_ok = true;
  auto fail = [&](const std::string& msg) { r.failures.push_back(msg); };
  if (!r.eta_ok) fail("eta must lie in [0, R)");

  for (const auto& m : world.explorers()) {
    ExplorerBounds eb;
    eb.name = m.name;
    eb.s_max_a = control::smax(m.a);
    eb.s_max_c = control::smax(m.c);
    eb.kappa = eb.s_max_a * r.x_g_bar + m.d_bar;
    const auto ext = control::sym_eig_extremes(m.p);
    eb.lambda_min_p = ext.min;
    eb.lambda_max_p = ext.max;
    if (v_t > 0.0 && eb.kappa == 0.0) {
      // no disturbance and x_g = 0: the estimate never drifts
      eb.tau = std::numeric_limits<double>::infinity();
      eb.n_steps = std::numeric_limits<int>::max();
    } else if (v_t > 0.0) {
      eb.tau = max_dwell_time(eb.s_max_a, v_t, eb.kappa);
      eb.n_steps = dwell_steps(eb.tau, cfg.ts);
    }
    const RhoValues rv = rho_values(m.d_bar, m.p, m.a, m.b, v_t, r.x_g_bar);
    eb.rho = rv.rho;
    eb.rho_star = rv.rho_star;
    eb.bound_rho = ultimate_bound(ext.min, ext.max, k, rv.rho);
    eb.bound_rho_star = ultimate_bound(ext.min, ext.max, k, rv.rho_star);
    r.v_t_limit = std::min(r.v_t_limit, (cfg.comm_radius - cfg.eta) / eb.s_max_c);
    if (!(eb.bound_rho * eb.s_max_c < cfg.goal_radius)) {
      r.ultimate_ok = false;
      std::ostringstream os;
      os << "explorer '" << m.name << "': Lambda(rho) * S_max(C) = " << eb.bound_rho * eb.s_max_c
         << " is not below R_f = " << cfg.goal_radius;
      fail(os.str());
    }
    if (eb.n_steps < 1) {
      r.dwell_steps_ok = false;
      fail("explorer '" + m.name + "': dwell time " + std::to_string(eb.tau) +
           " s is shorter than one sampling period");
    }
    r.explorers.push_back(eb);
  }
  // closed boundary; allow for rounding in the power-iteration S_max(C)
  r.v_t_ok = v_t > 0.0 && v_t <= r.v_t_limit * (1.0 + 1e-9);
  if (!r.v_t_ok) {
    std::ostringstream os;
    os << "V_T = " << v_t << " must lie in (0, " << r.v_t_limit << "]";
    fail(os.str());
  }
  r.termination_ok = r.v_t_ok && r.eta_ok && r.ultimate_ok && r.dwell_steps_ok;
  return r;
}

}  // namespace relay_mtl::analysis

#pragma once

#include <string>
#include <vector>

#include "relay_mtl/sim/agents.hpp"

namespace relay_mtl::analysis {

using control::Matrix;
using control::Vector;

/// Longest gap between services keeping the estimation error below V_T:
/// ln(V_T * s / kappa + 1) / s, or V_T / kappa when s == 0.
double max_dwell_time(double s_max_a, double v_t, double kappa);

/// floor(tau / ts); the largest step count whose duration does not exceed tau.
int dwell_steps(double tau, double ts);

/// Estimation error envelope after a service at t_s: kappa / s * (e^{s (t - t_s)} - 1).
double phi_bound(double t, double t_s, double kappa, double s_max_a);

/// Exponential envelope of the estimated tracking error after a service at t_s.
double e2_envelope(double lambda_min, double lambda_max, double k, double e2_at_service, double elapsed);

/// Ultimate-bound envelope of the tracking error started from ||e(0)||.
double ei_envelope(double lambda_min, double lambda_max, double k, double rho, double e0, double t);

/// lambda_max * rho / (lambda_min * k)
double ultimate_bound(double lambda_min, double lambda_max, double k, double rho);

struct RhoValues {
  double rho = 0.0;
  double rho_star = 0.0;
};

RhoValues rho_values(double d_bar, const Matrix& p, const Matrix& a, const Matrix& b, double v_t, double x_g_bar);

struct ExplorerBounds {
  std::string name;
  double kappa = 0.0;
  double tau = 0.0;
  int n_steps = 0;
  double lambda_min_p = 0.0;
  double lambda_max_p = 0.0;
  double s_max_a = 0.0;
  double s_max_c = 0.0;
  double rho = 0.0;
  double rho_star = 0.0;
  double bound_rho = 0.0;       // Lambda(rho)
  double bound_rho_star = 0.0;  // Lambda(rho*)
};

struct BoundReport {
  std::vector<ExplorerBounds> explorers;
  double x_g_bar = 0.0;
  double v_t = 0.0;
  double v_t_limit = 0.0;  // (R - eta) / S_max(C), smallest over explorers
  bool v_t_ok = false;          // (i)   0 < V_T <= (R - eta) / S_max(C)
  bool eta_ok = false;          // (ii)  0 <= eta < R
  bool ultimate_ok = false;     // (iii) Lambda(rho) S_max(C) < R_f
  bool dwell_steps_ok = false;  // (iv)  n_i >= 1
  bool termination_ok = false;
  std::vector<std::string> failures;
};

/// Evaluates the sufficient conditions for finite termination and collects the
/// intermediate quantities. Never throws on a failed condition; see `failures`.
BoundReport validate_config(const sim::World& world, double v_t, double k);

}  // namespace relay_mtl::analysis

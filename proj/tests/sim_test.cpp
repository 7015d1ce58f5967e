#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "relay_mtl/analysis/dwell.hpp"
#include "relay_mtl/sim/agents.hpp"

using namespace relay_mtl;
using namespace relay_mtl::sim;
using control::Matrix;
using control::Vector;

namespace {

constexpr double kGain = 0.1;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

RelayModel relay() { return hover_relay_model(Vector::Constant(4, -5.0), Vector::Constant(4, 5.0)); }

WorldConfig config(const Vector& x_g, double eta = 4.0) {
  WorldConfig c;
  c.x_g = x_g;
  c.eta = eta;
  return c;
}

World reference_world() {
  std::vector<ExplorerModel> ex{double_integrator_explorer("e1", 0.04, kGain),
                                double_integrator_explorer("e2", 0.03, kGain),
                                double_integrator_explorer("e3", 0.02, kGain)};
  return World(relay(), ex, config(Vector::Zero(4)));
}

Matrix reference_p() {
  Matrix p(4, 4);
  p << 0.23, 0, 0.22, 0, 0, 0.23, 0, 0.22, 0.22, 0, 0.52, 0, 0, 0.22, 0, 0.52;
  return p;
}

double lambda_max(const Matrix& p) { return Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().maxCoeff(); }
double lambda_min(const Matrix& p) { return Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff(); }
double largest_sv(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

}  // namespace

TEST(Relay, HoverModelStructure) {
  const RelayModel m = relay();
  ASSERT_EQ(m.a0.rows(), 8);
  ASSERT_EQ(m.b0.cols(), 4);
  EXPECT_EQ((m.a0.array() != 0.0).count(), 4);
  EXPECT_EQ(m.a0(0, 3), 1.0);
  EXPECT_EQ(m.a0(1, 4), 1.0);
  EXPECT_EQ(m.a0(3, 6), 9.81);
  EXPECT_EQ(m.a0(4, 5), -9.81);
  EXPECT_EQ((m.b0.array() != 0.0).count(), 4);
  EXPECT_EQ(control::controllability_rank(m.a0, m.b0), 8);
  EXPECT_THROW(hover_relay_model(Vector::Constant(4, 1.0), Vector::Constant(4, 1.0)), std::invalid_argument);
}

TEST(Relay, ZohStepMatchesClosedForm) {
  const World w = reference_world();
  const auto& d = w.relay_discrete();
  const double ts = 0.5;
  const Vector up = d.bd * vec({1, 0, 0, 0});
  EXPECT_NEAR(up(2), ts, 1e-15);
  EXPECT_NEAR(up.norm(), ts, 1e-15);
  // constant pitch rate: beta = t, x1'' = g t, x1' = g t^2 / 2, x1 = g t^3 / 6
  const Vector pitch = d.bd * vec({0, 0, 1, 0});
  EXPECT_NEAR(pitch(6), ts, 1e-14);
  EXPECT_NEAR(pitch(3), 9.81 * ts * ts / 2, 1e-13);
  EXPECT_NEAR(pitch(0), 9.81 * ts * ts * ts / 6, 1e-13);
  const Vector roll = d.bd * vec({0, 1, 0, 0});
  EXPECT_NEAR(roll(1), -9.81 * ts * ts * ts / 6, 1e-13);
  EXPECT_NEAR(d.ad(0, 6), 9.81 * ts * ts / 2, 1e-13);
}

TEST(Explorer, ModelAndStabilizability) {
  const auto e = double_integrator_explorer("e", 0.04, kGain);
  EXPECT_EQ(control::controllability_rank(e.a, e.b), 4);
  EXPECT_TRUE((e.c * Vector::Zero(4)).isZero());
  EXPECT_LE(control::care_residual(e.a, e.b, kGain, e.p), 1e-6);
  EXPECT_LE((e.p - reference_p()).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Explorer, ControlLaw) {
  auto e = double_integrator_explorer("e", 0.04, kGain);
  e.p = reference_p();
  const Vector u = explorer_control(vec({1, 0, 0, 0}), Vector::Zero(4), e);
  EXPECT_NEAR(u(0), -0.22, 1e-15);
  EXPECT_NEAR(u(1), 0.0, 1e-15);
  EXPECT_TRUE(explorer_control(vec({1, 2, 3, 4}), vec({1, 2, 3, 4}), e).isZero());
  const Vector u2 = explorer_control(vec({2, 0, 0, 0}), Vector::Zero(4), e);
  EXPECT_NEAR(u2(0), 2 * u(0), 1e-15);
}

TEST(Explorer, ObserverMatchesEstimatedErrorDynamics) {
  const auto e = double_integrator_explorer("e", 0.04, kGain);
  EXPECT_TRUE(observer_derivative(Vector::Zero(4), Vector::Zero(2), e, Vector::Zero(4)).isZero());
  EXPECT_TRUE(observer_derivative(vec({1, 0, 0, 0}), Vector::Zero(2), e, Vector::Zero(4)).isZero());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    Vector xh(4), xg(4);
    for (int i = 0; i < 4; ++i) {
      xh(i) = n(rng);
      xg(i) = n(rng);
    }
    const Vector u = explorer_control(xh, xg, e);
    const Vector e2 = xg - xh;
    const Vector de2 = -observer_derivative(xh, u, e, xg);
    const Vector expect = (e.a - e.b * e.b.transpose() * e.p) * e2;
    EXPECT_LE((de2 - expect).norm(), 1e-12);
  }
}

TEST(Disturbance, SupportAndDeterminism) {
  Rng zero(1);
  EXPECT_TRUE(sample_disturbance(zero, 0.0, 4).isZero());
  Rng rng(42);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vector d = sample_disturbance(rng, 0.04, 4);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
    ASSERT_LE(d.norm(), 0.04);
  }
  EXPECT_LE(worst, 0.02);
  EXPECT_GT(worst, 0.0199);
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.uniform01(), b.uniform01());
}

TEST(World, EquilibriumIsFixed) {
  std::vector<ExplorerModel> ex{double_integrator_explorer("e", 0.0, kGain)};
  const World w(relay(), ex, config(Vector::Zero(4)));
  const WorldState s0 = w.initial_state(Vector::Zero(8), {Vector::Zero(4)});
  Rng rng(1);
  const WorldState s1 = w.step(s0, Vector::Zero(4), rng);
  EXPECT_EQ(s1.t_index, 1);
  EXPECT_TRUE(s1.x0.isZero());
  EXPECT_TRUE(s1.explorers[0].x.isZero());
  EXPECT_TRUE(s1.explorers[0].x_hat.isZero());
}

TEST(World, NoDisturbanceKeepsEstimateExact) {
  std::vector<ExplorerModel> ex{double_integrator_explorer("e", 0.0, kGain)};
  const World w(relay(), ex, config(Vector::Zero(4)));
  WorldState s = w.initial_state(Vector::Zero(8), {vec({-10, -10, 0.5, 0})});
  Rng rng(1);
  for (int j = 0; j < 100; ++j) {
    s = w.step(s, Vector::Zero(4), rng);
    ASSERT_LE((s.explorers[0].x - s.explorers[0].x_hat).norm(), 1e-9);
  }
}

TEST(World, ServiceDetectionIsInclusive) {
  const World w = reference_world();
  WorldState s = w.initial_state(Vector::Zero(8), {vec({0, 0, 0, 0}), vec({4, 0, 0, 0}), vec({0, 4.0001, 0, 0})});
  EXPECT_EQ(w.detect_service(s), (std::vector<int>{0, 1}));
  s.x0(0) = 100.0;
  EXPECT_TRUE(w.detect_service(s).empty());
}

TEST(World, ApplyServiceResetsEstimate) {
  const World w = reference_world();
  WorldState s = w.initial_state(Vector::Zero(8), {vec({10, 0, 0, 0}), vec({20, 0, 0, 0}), vec({30, 0, 0, 0})});
  Rng rng(5);
  for (int j = 0; j < 4; ++j) s = w.step(s, Vector::Zero(4), rng);
  ASSERT_GT((s.explorers[0].x - s.explorers[0].x_hat).norm(), 0.0);
  const WorldState same = w.apply_service(s, {});
  EXPECT_EQ(same.explorers[0].x_hat, s.explorers[0].x_hat);
  const WorldState t = w.apply_service(s, {0});
  EXPECT_EQ(t.explorers[0].x_hat, t.explorers[0].x);
  EXPECT_EQ(t.explorers[0].last_service_index, 4);
  EXPECT_NE(t.explorers[1].x_hat, t.explorers[1].x);
}

TEST(World, BitReproducible) {
  const World w = reference_world();
  auto run = [&] {
    WorldState s = w.initial_state(Vector::Zero(8), {vec({-100, -100, 0, 0}), vec({100, 150, 0, 0}), vec({150, -150, 0, 0})});
    Rng rng(42);
    for (int j = 0; j < 20; ++j) s = w.step(s, vec({0.1, 0.2, -0.1, 0}), rng);
    return s;
  };
  const WorldState a = run();
  const WorldState b = run();
  EXPECT_EQ(a.x0, b.x0);
  for (std::size_t i = 0; i < a.explorers.size(); ++i) {
    EXPECT_EQ(a.explorers[i].x, b.explorers[i].x);
    EXPECT_EQ(a.explorers[i].x_hat, b.explorers[i].x_hat);
  }
}

TEST(World, RejectsBadConfig) {
  WorldConfig c = config(Vector::Zero(4), 5.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  std::vector<ExplorerModel> ex{double_integrator_explorer("e", 0.04, kGain)};
  EXPECT_THROW(World(relay(), ex, config(Vector::Zero(3))), control::DimensionError);
}

TEST(Dwell, ReferenceExplorerOne) {
  EXPECT_NEAR(analysis::max_dwell_time(1.0, 1.0, 0.04), std::log(26.0), 1e-12);
  EXPECT_EQ(analysis::dwell_steps(analysis::max_dwell_time(1.0, 1.0, 0.04), 0.5), 6);
  EXPECT_EQ(analysis::dwell_steps(analysis::max_dwell_time(1.0, 1.0, 0.03), 0.5), 7);
  EXPECT_EQ(analysis::dwell_steps(analysis::max_dwell_time(1.0, 1.0, 0.02), 0.5), 7);
}

TEST(Dwell, LimitsAndErrors) {
  EXPECT_NEAR(analysis::max_dwell_time(0.0, 1.0, 0.5), 2.0, 1e-15);
  EXPECT_LT(analysis::max_dwell_time(1.0, 1e-12, 0.04), 1e-10);
  EXPECT_THROW(analysis::max_dwell_time(1.0, 0.0, 0.04), std::invalid_argument);
  EXPECT_THROW(analysis::max_dwell_time(1.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_EQ(analysis::dwell_steps(3.2581, 0.5), 6);
  EXPECT_EQ(analysis::dwell_steps(0.49, 0.5), 0);
  EXPECT_EQ(analysis::dwell_steps(1.0, 0.5), 2);
  EXPECT_EQ(analysis::phi_bound(3.0, 3.0, 0.04, 1.0), 0.0);
  EXPECT_NEAR(analysis::phi_bound(10.0, 0.0, 0.04, 0.0), 0.4, 1e-15);
  EXPECT_THROW(analysis::phi_bound(1.0, 2.0, 0.04, 1.0), std::invalid_argument);
}

TEST(Dwell, EnvelopeReachesThresholdAtDwellTime) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> s(0.0, 3.0), v(0.01, 5.0), k(0.001, 2.0), ts(0.0, 100.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double sa = trial % 10 == 0 ? 0.0 : s(rng);
    const double vt = v(rng);
    const double kappa = k(rng);
    const double t0 = ts(rng);
    const double tau = analysis::max_dwell_time(sa, vt, kappa);
    ASSERT_NEAR(analysis::phi_bound(t0 + tau, t0, kappa, sa), vt, 1e-12 * std::max(1.0, vt))
        << sa << " " << vt << " " << kappa;
    const int n = analysis::dwell_steps(tau, 0.5);
    ASSERT_LE(n * 0.5, tau);
    ASSERT_GT((n + 1) * 0.5, tau);
  }
}

TEST(Dwell, Monotonicity) {
  for (double sa : {0.0, 0.5, 1.0, 2.0}) {
    double prev = 0.0;
    for (double vt = 0.1; vt <= 5.0; vt += 0.1) {
      const double tau = analysis::max_dwell_time(sa, vt, 0.04);
      EXPECT_GT(tau, prev);
      prev = tau;
    }
    prev = analysis::max_dwell_time(sa, 1.0, 0.001);
    for (double kappa = 0.002; kappa <= 2.0; kappa += 0.01) {
      const double tau = analysis::max_dwell_time(sa, 1.0, kappa);
      EXPECT_LT(tau, prev);
      prev = tau;
    }
  }
}

TEST(Bounds, RhoAgainstEigenOracle) {
  const Matrix p = reference_p();
  const auto e = double_integrator_explorer("e", 0.04, kGain);
  const auto r0 = analysis::rho_values(0.04, p, e.a, e.b, 0.0, 0.0);
  EXPECT_NEAR(r0.rho, r0.rho_star, 1e-15);
  EXPECT_NEAR(r0.rho_star, 2 * 0.04 * lambda_max(p), 1e-9);
  const auto r1 = analysis::rho_values(0.04, p, e.a, e.b, 1.0, 0.0);
  EXPECT_NEAR(r1.rho_star, 0.0511, 5e-4);
  EXPECT_GE(r1.rho, r1.rho_star);
  const Matrix pbbp = p * e.b * e.b.transpose() * p;
  EXPECT_NEAR(r1.rho - r1.rho_star, 2 * largest_sv(pbbp), 1e-9);
  const auto r2 = analysis::rho_values(0.04, p, e.a, e.b, 1.0, 3.0);
  EXPECT_NEAR(r2.rho - r1.rho, 2 * largest_sv(p * e.a) * 3.0, 1e-9);
}

TEST(Bounds, EnvelopeExamples) {
  const Matrix p = reference_p();
  const double lmin = lambda_min(p), lmax = lambda_max(p);
  EXPECT_NEAR(analysis::e2_envelope(lmin, lmax, kGain, 2.0, 0.0), std::sqrt(lmax / lmin) * 2.0, 1e-14);
  const double rho_star = 2 * 0.04 * lmax;
  const double lambda = analysis::ultimate_bound(lmin, lmax, kGain, rho_star);
  EXPECT_NEAR(lambda, lmax * rho_star / (lmin * kGain), 1e-12);
  EXPECT_NEAR(lambda, 2.9, 0.1);
  EXPECT_LT(lambda, 5.0);
  EXPECT_NEAR(analysis::ei_envelope(lmin, lmax, kGain, rho_star, 10.0, 1e6), lambda, 1e-9);
  EXPECT_THROW(analysis::e2_envelope(0.0, 1.0, kGain, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(analysis::ei_envelope(1.0, 0.5, kGain, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Bounds, ReferenceScenarioReport) {
  const World w = reference_world();
  const auto r = analysis::validate_config(w, 1.0, kGain);
  EXPECT_TRUE(r.v_t_ok);
  EXPECT_NEAR(r.v_t_limit, 1.0, 1e-9);
  EXPECT_TRUE(r.eta_ok);
  EXPECT_TRUE(r.dwell_steps_ok);
  ASSERT_EQ(r.explorers.size(), 3u);
  EXPECT_EQ(r.explorers[0].n_steps, 6);
  EXPECT_EQ(r.explorers[1].n_steps, 7);
  EXPECT_EQ(r.explorers[2].n_steps, 7);
  // Lambda(rho) with V_T = 1 is far above R_f = 5 for the reference gains.
  EXPECT_FALSE(r.ultimate_ok);
  EXPECT_FALSE(r.termination_ok);
  EXPECT_FALSE(r.failures.empty());
  const double oracle = lambda_max(w.explorers()[0].p) *
                        (2 * 0.04 * lambda_max(w.explorers()[0].p) +
                         2 * largest_sv(w.explorers()[0].p * w.explorers()[0].b * w.explorers()[0].b.transpose() * w.explorers()[0].p)) /
                        (lambda_min(w.explorers()[0].p) * kGain);
  EXPECT_NEAR(r.explorers[0].bound_rho, oracle, 1e-6 * oracle);
  EXPECT_LT(r.explorers[0].bound_rho_star, 5.0);
  EXPECT_FALSE(analysis::validate_config(w, 1.5, kGain).v_t_ok);
}

// Estimation error stays under the dwell envelope between services, for 100 seeds.
TEST(Envelopes, EstimationErrorUnderPhi) {
  const World w = reference_world();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    WorldState s = w.initial_state(Vector::Zero(8), {vec({-100, -100, 0, 0}), vec({100, 150, 0, 0}), vec({150, -150, 0, 0})});
    Rng rng(seed);
    for (int j = 1; j <= 24; ++j) {
      s = w.step(s, Vector::Zero(4), rng);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& m = w.explorers()[i];
        const double e1 = (s.explorers[i].x - s.explorers[i].x_hat).norm();
        const double t_s = 0.5 * s.explorers[i].last_service_index;
        const double bound = analysis::phi_bound(0.5 * j, t_s, m.d_bar, largest_sv(m.a));
        ASSERT_LE(e1, bound) << "seed " << seed << " step " << j << " explorer " << i;
      }
      if (j % 8 == 0) s = w.apply_service(s, {0, 1, 2});
    }
  }
}

// Same check with a non-zero goal so kappa includes the goal term.
TEST(Envelopes, EstimationErrorUnderPhiWithOffsetGoal) {
  std::vector<ExplorerModel> ex{double_integrator_explorer("e", 0.04, kGain)};
  const Vector xg = vec({3, -2, 0, 0});
  const World w(relay(), ex, config(xg));
  const double kappa = largest_sv(ex[0].a) * xg.norm() + 0.04;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    WorldState s = w.initial_state(Vector::Zero(8), {vec({-40, 25, 0, 0})});
    Rng rng(seed);
    for (int j = 1; j <= 16; ++j) {
      s = w.step(s, Vector::Zero(4), rng);
      const double e1 = (s.explorers[0].x - s.explorers[0].x_hat).norm();
      ASSERT_LE(e1, analysis::phi_bound(0.5 * j, 0.0, kappa, largest_sv(ex[0].a)));
    }
  }
}

TEST(Envelopes, EstimatedTrackingErrorUnderExponentialBound) {
  const World w = reference_world();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    WorldState s = w.initial_state(Vector::Zero(8), {vec({-100, -100, 0, 0}), vec({100, 150, 1, 0}), vec({150, -150, 0, -1})});
    Rng rng(seed);
    std::vector<double> e2_at_service(3);
    for (std::size_t i = 0; i < 3; ++i) e2_at_service[i] = (w.config().x_g - s.explorers[i].x_hat).norm();
    for (int j = 1; j <= 60; ++j) {
      s = w.step(s, Vector::Zero(4), rng);
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& m = w.explorers()[i];
        const double e2 = (w.config().x_g - s.explorers[i].x_hat).norm();
        const double elapsed = 0.5 * (j - s.explorers[i].last_service_index);
        ASSERT_LE(e2, analysis::e2_envelope(lambda_min(m.p), lambda_max(m.p), kGain, e2_at_service[i], elapsed) + 1e-9);
      }
      if (j % 5 == 0) {
        s = w.apply_service(s, {0, 1, 2});
        for (std::size_t i = 0; i < 3; ++i) e2_at_service[i] = (w.config().x_g - s.explorers[i].x_hat).norm();
      }
    }
  }
}

TEST(Envelopes, TrackingErrorUnderUltimateBoundWithDwellServices) {
  const World w = reference_world();
  const auto report = analysis::validate_config(w, 1.0, kGain);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    WorldState s = w.initial_state(Vector::Zero(8), {vec({-10, -10, 0, 0}), vec({10, 15, 0, 0}), vec({15, -15, 0, 0})});
    std::vector<double> e0(3);
    for (std::size_t i = 0; i < 3; ++i) e0[i] = (w.config().x_g - s.explorers[i].x).norm();
    Rng rng(seed);
    for (int j = 1; j <= 200; ++j) {
      s = w.step(s, Vector::Zero(4), rng);
      std::vector<int> due;
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& m = w.explorers()[i];
        const auto& b = report.explorers[i];
        const double e = (w.config().x_g - s.explorers[i].x).norm();
        ASSERT_LE(e, analysis::ei_envelope(lambda_min(m.p), lambda_max(m.p), kGain, b.rho, e0[i], 0.5 * j) + 1e-9);
        if (j - s.explorers[i].last_service_index >= b.n_steps) due.push_back(static_cast<int>(i));
      }
      s = w.apply_service(s, due);
    }
  }
}

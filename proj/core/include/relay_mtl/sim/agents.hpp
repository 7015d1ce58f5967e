#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "relay_mtl/control/linalg.hpp"

namespace relay_mtl::sim {

using control::Matrix;
using control::Vector;

struct RelayModel {
  Matrix a0;  // l x l
  Matrix b0;  // l x n0
  Matrix c0;  // z x l
  Vector u_min;
  Vector u_max;

  void validate() const;
};

/// Hover-linearized kinematic quadrotor: state [x1, x2, x3, x1', x2', alpha, beta, gamma],
/// input [vertical velocity, roll rate, pitch rate, yaw rate].
RelayModel hover_relay_model(const Vector& u_min, const Vector& u_max, double gravity = 9.81);

struct ExplorerModel {
  std::string name;
  Matrix a;  // m x m
  Matrix b;  // m x n
  Matrix c;  // z x m
  Matrix p;  // ARE solution
  double d_bar = 0.0;

  void validate() const;
};

/// Planar double integrator (positions then velocities) with P from the ARE with weight k.
/// Positions map to (x, y, 0).
ExplorerModel double_integrator_explorer(const std::string& name, double d_bar, double k);

/// u = B^T P (x_g - x_hat).
Vector explorer_control(const Vector& x_hat, const Vector& x_g, const ExplorerModel& model);

/// Observer flow between services: A (x_hat - x_g) + B u.
Vector observer_derivative(const Vector& x_hat, const Vector& u, const ExplorerModel& model,
                           const Vector& x_g);

/// Deterministic uniform source. Doubles are built from the top 53 bits of mt19937_64
/// so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Each component i.i.d. uniform on [-d_bar/2, d_bar/2].
Vector sample_disturbance(Rng& rng, double d_bar, Eigen::Index dim);

struct ExplorerState {
  Vector x;
  Vector x_hat;
  int last_service_index = 0;
  bool in_goal = false;
};

struct WorldState {
  int t_index = 0;
  Vector x0;
  std::vector<ExplorerState> explorers;
};

struct WorldConfig {
  double ts = 0.5;
  int substeps = 20;
  Vector x_g;
  double comm_radius = 5.0;  // R
  double goal_radius = 5.0;  // R_f
  double eta = 4.0;

  void validate() const;
};

enum class ServiceTrigger { Relay, GoalRegion };

struct ServiceEvent {
  int t_index = 0;
  std::vector<int> explorers;
  ServiceTrigger trigger = ServiceTrigger::Relay;
};

/// Models and parameters that stay fixed over a run.
class World {
 public:
  World(RelayModel relay, std::vector<ExplorerModel> explorers, WorldConfig config);

  const RelayModel& relay() const { return relay_; }
  const control::DiscretePair& relay_discrete() const { return relay_d_; }
  const std::vector<ExplorerModel>& explorers() const { return explorers_; }
  const WorldConfig& config() const { return config_; }

  /// Initial state: estimates equal true states, everything serviced at index 0.
  WorldState initial_state(const Vector& x0, const std::vector<Vector>& explorer_x) const;

  Vector relay_position(const WorldState& s) const { return relay_.c0 * s.x0; }
  Vector explorer_position(const WorldState& s, std::size_t i) const { return explorers_[i].c * s.explorers[i].x; }
  Vector estimate_position(const WorldState& s, std::size_t i) const {
    return explorers_[i].c * s.explorers[i].x_hat;
  }
  Vector goal_position(std::size_t i) const { return explorers_[i].c * config_.x_g; }

  /// Relay: one exact discrete step. Explorers: RK4 with `substeps` sub-steps, feedback
  /// recomputed from the estimate inside every stage, disturbance redrawn per sub-step.
  /// Throws control::NumericalError on non-finite states.
  WorldState step(const WorldState& s, const Vector& u0, Rng& rng) const;

  /// Explorers whose estimate is within eta of the relay (Euclidean, inclusive).
  std::vector<int> detect_service(const WorldState& s) const;
  /// Explorers whose true position is within R_f of the goal.
  std::vector<int> detect_goal(const WorldState& s) const;

  /// Resets the estimates of `ids` to the true states and records the service.
  WorldState apply_service(const WorldState& s, const std::vector<int>& ids) const;

  bool all_in_goal(const WorldState& s) const;

 private:
  RelayModel relay_;
  control::DiscretePair relay_d_;
  std::vector<ExplorerModel> explorers_;
  WorldConfig config_;
};

}  // namespace relay_mtl::sim

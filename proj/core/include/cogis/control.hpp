#pragma once

#include "cogis/gpis.hpp"
#include "cogis/rng.hpp"
#include "cogis/types.hpp"

#include <functional>
#include <vector>

namespace cogis::control {

struct CostWeights {
  double alpha = 1.0;      // action
  double beta = 1.0;       // exploration
  double collision = 1.0;  // C
  double eta = 1.0;        // goal basin depth
  double goal_radius = 0.02;

  void validate() const;
};

struct MppiConfig {
  double lambda = 1.0;
  int samples = 100;
  int horizon = 15;
  Vec sigma;  // diagonal of the control-noise covariance
  Vec u_min;
  Vec u_max;
  unsigned threads = 1;

  [[nodiscard]] Eigen::Index control_dim() const { return sigma.size(); }
  void validate() const;
};

/// states[0] is the start; states[t + 1] = f(states[t], controls[t]).
struct Trajectory {
  std::vector<StateSet> states;
  std::vector<Vec> controls;
};

using Dynamics = std::function<StateSet(const StateSet&, const Vec&)>;

/// sum over t = 1..T of -eta [all goal components within r_g] + sum_i d(G_i, x_t^i).
double goal_cost(const Trajectory& traj, const GoalSet& goals, const CostWeights& w,
                 DistanceFn d_x = euclidean);
/// sum over t of ||u_t||.
double action_cost(const Trajectory& traj);
/// Number of rollout points (t >= 1, all components) with post-processed mean <= 0.
double collision_cost(const Trajectory& traj, const Gpis& surface);
/// -sum over t >= 1 of the raw posterior variance at component s.
double exploration_cost(const Trajectory& traj, const Gpis& surface, Eigen::Index s);

/// Component with the lowest post-processed mean; ties go to the lowest index.
Eigen::Index select_component(const Gpis& surface, const StateSet& x);

/// w_k = exp(-(J_k - min J) / lambda), normalized. Non-finite costs get zero
/// weight; if every cost is non-finite the weights are uniform.
Vec importance_weights(const std::vector<double>& costs, double lambda);

/// J = J_g + alpha J_u + C J_c + beta J_e. Without a surface the collision and
/// exploration terms are zero.
struct CostModel {
  GoalSet goals;
  CostWeights weights;
  DistanceFn d_x = euclidean;
  const Gpis* surface = nullptr;
  Eigen::Index explore_component = 0;

  [[nodiscard]] double evaluate(const Trajectory& traj) const;
  /// Same values as evaluate() on each trajectory, with one batched GP query.
  [[nodiscard]] std::vector<double> evaluate_batch(const std::vector<Trajectory>& trajs) const;
};

Trajectory rollout(const StateSet& start, const std::vector<Vec>& controls, const Dynamics& f);

struct MppiResult {
  Vec action;                 // first control of the updated sequence
  std::vector<Vec> nominal;   // updated sequence shifted by one, last repeated
  std::vector<double> costs;  // per sample
  Vec weights;                // per sample
};

/// One MPPI iteration. Sample k draws its noise from rng.split(k), so the
/// result does not depend on cfg.threads.
MppiResult mppi_step(const StateSet& x, const std::vector<Vec>& nominal, const Dynamics& f,
                     const CostModel& cost, const MppiConfig& cfg, const Rng& rng);

}  // namespace cogis::control

#include "cogis/control.hpp"

#include "cogis/parallel.hpp"

#include <cmath>
#include <limits>

namespace cogis::control {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(const Trajectory& traj) {
  for (const StateSet& s : traj.states)
    if (!s.matrix().allFinite()) return false;
  return true;
}

double goal_and_action(const Trajectory& traj, const CostModel& m) {
  return goal_cost(traj, m.goals, m.weights, m.d_x) + m.weights.alpha * action_cost(traj);
}

}  // namespace

void CostWeights::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(collision) &&
              std::isfinite(eta),
          "cost weights must be finite");
  require(collision >= 0.0 && eta >= 0.0, "collision and goal weights must be non-negative");
  require(goal_radius > 0.0, "goal radius must be positive");
}

void MppiConfig::validate() const {
  require(lambda > 0.0, "MPPI temperature must be positive");
  require(samples >= 1 && horizon >= 1, "MPPI needs at least one sample and one step");
  require(sigma.size() > 0 && (sigma.array() > 0.0).all(), "MPPI noise must be positive");
  require(u_min.size() == sigma.size() && u_max.size() == sigma.size(),
          "control bounds must match the noise dimension");
  require((u_min.array() <= u_max.array()).all(), "control lower bound exceeds upper bound");
}

double goal_cost(const Trajectory& traj, const GoalSet& goals, const CostWeights& w, DistanceFn d_x) {
  if (goals.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    bool all_in = true;
    for (const Goal& g : goals) {
      const double d = d_x(g.point, traj.states[t].col(g.component));
      total += d;
      all_in = all_in && d < w.goal_radius;
    }
    if (all_in) total -= w.eta;
  }
  return total;
}

double action_cost(const Trajectory& traj) {
  double total = 0.0;
  for (const Vec& u : traj.controls) total += u.norm();
  return total;
}

double collision_cost(const Trajectory& traj, const Gpis& surface) {
  double count = 0.0;
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    Vec means;
    surface.predict_batch(traj.states[t].matrix(), &means, nullptr);
    count += static_cast<double>((means.array() <= 0.0).count());
  }
  return count;
}

double exploration_cost(const Trajectory& traj, const Gpis& surface, Eigen::Index s) {
  double total = 0.0;
  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    require(s >= 0 && s < traj.states[t].size(), "exploration component out of range");
    total -= surface.predict_raw(traj.states[t].col(s)).variance;
  }
  return total;
}

Eigen::Index select_component(const Gpis& surface, const StateSet& x) {
  require(x.size() >= 1, "select_component: empty state");
  Vec means;
  surface.predict_batch(x.matrix(), &means, nullptr);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < means.size(); ++i)
    if (means[i] < means[best]) best = i;
  return best;
}

Vec importance_weights(const std::vector<double>& costs, double lambda) {
  require(!costs.empty(), "importance_weights: no samples");
  require(lambda > 0.0, "importance_weights: temperature must be positive");
  const auto k = static_cast<Eigen::Index>(costs.size());
  double lo = kInf;
  for (double c : costs)
    if (std::isfinite(c)) lo = std::min(lo, c);
  Vec w(k);
  if (!std::isfinite(lo)) {
    w.setConstant(1.0 / static_cast<double>(k));
    return w;
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = costs[static_cast<std::size_t>(i)];
    w[i] = std::isfinite(c) ? std::exp(-(c - lo) / lambda) : 0.0;
  }
  return w / w.sum();
}

double CostModel::evaluate(const Trajectory& traj) const {
  if (!finite(traj)) return kInf;
  double j = goal_and_action(traj, *this);
  if (surface) {
    j += weights.collision * collision_cost(traj, *surface);
    j += weights.beta * exploration_cost(traj, *surface, explore_component);
  }
  return j;
}

std::vector<double> CostModel::evaluate_batch(const std::vector<Trajectory>& trajs) const {
  std::vector<double> costs(trajs.size(), kInf);
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    if (!finite(trajs[k])) continue;
    costs[k] = goal_and_action(trajs[k], *this);
    live.push_back(k);
  }
  if (!surface || live.empty()) return costs;

  // Every rollout point (t >= 1) goes into one query matrix; the explored
  // component's points come first so variances are computed only for them.
  const Trajectory& first = trajs[live.front()];
  const Eigen::Index n = first.states.front().size();
  const Eigen::Index d = first.states.front().dim();
  require(explore_component >= 0 && explore_component < n, "exploration component out of range");
  const auto steps = static_cast<Eigen::Index>(first.states.size()) - 1;
  const Eigen::Index per = steps * static_cast<Eigen::Index>(live.size());
  Mat explored(d, per);
  Mat others(d, per * (n - 1));
  Eigen::Index e = 0;
  Eigen::Index o = 0;
  for (std::size_t k : live) {
    require(static_cast<Eigen::Index>(trajs[k].states.size()) == steps + 1,
            "rollouts must share one horizon");
    for (Eigen::Index t = 1; t <= steps; ++t) {
      const Mat& s = trajs[k].states[static_cast<std::size_t>(t)].matrix();
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i == explore_component)
          explored.col(e++) = s.col(i);
        else
          others.col(o++) = s.col(i);
      }
    }
  }
  Vec mean_e;
  Vec var_e;
  Vec mean_o;
  surface->predict_batch(explored, &mean_e, &var_e);
  if (others.cols() > 0) surface->predict_batch(others, &mean_o, nullptr);

  for (std::size_t a = 0; a < live.size(); ++a) {
    const auto base = static_cast<Eigen::Index>(a) * steps;
    double hits = static_cast<double>((mean_e.segment(base, steps).array() <= 0.0).count());
    if (others.cols() > 0)
      hits += static_cast<double>((mean_o.segment(base * (n - 1), steps * (n - 1)).array() <= 0.0).count());
    const double explore = -var_e.segment(base, steps).sum();
    costs[live[a]] += weights.collision * hits + weights.beta * explore;
  }
  return costs;
}

Trajectory rollout(const StateSet& start, const std::vector<Vec>& controls, const Dynamics& f) {
  Trajectory traj;
  traj.controls = controls;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(start);
  for (const Vec& u : controls) traj.states.push_back(f(traj.states.back(), u));
  return traj;
}

MppiResult mppi_step(const StateSet& x, const std::vector<Vec>& nominal, const Dynamics& f,
                     const CostModel& cost, const MppiConfig& cfg, const Rng& rng) {
  cfg.validate();
  require(static_cast<int>(nominal.size()) == cfg.horizon, "nominal sequence length differs from horizon");
  const auto k_count = static_cast<std::size_t>(cfg.samples);
  const Eigen::Index du = cfg.control_dim();
  const Vec std_dev = cfg.sigma.cwiseSqrt();

  std::vector<Trajectory> trajs(k_count);
  parallel_for(k_count, cfg.threads, [&](std::size_t k) {
    Rng stream = rng.split(k);
    std::vector<Vec> controls(nominal.size());
    for (std::size_t t = 0; t < nominal.size(); ++t) {
      require(nominal[t].size() == du, "nominal control dimension mismatch");
      Vec u = nominal[t];
      for (Eigen::Index j = 0; j < du; ++j) u[j] += std_dev[j] * stream.normal();
      controls[t] = u.cwiseMax(cfg.u_min).cwiseMin(cfg.u_max);
    }
    trajs[k] = rollout(x, controls, f);
  });

  MppiResult out;
  out.costs = cost.evaluate_batch(trajs);
  out.weights = importance_weights(out.costs, cfg.lambda);

  std::vector<Vec> updated(nominal.size(), Vec::Zero(du));
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = out.weights[static_cast<Eigen::Index>(k)];
    if (w == 0.0) continue;
    for (std::size_t t = 0; t < nominal.size(); ++t) updated[t] += w * trajs[k].controls[t];
  }
  out.action = updated.front();
  out.nominal.assign(updated.begin() + 1, updated.end());
  out.nominal.push_back(updated.back());
  return out;
}

}  // namespace cogis::control

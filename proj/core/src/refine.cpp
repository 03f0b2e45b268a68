#include "cogis/refine.hpp"

#include "cogis/cmawm.hpp"
#include "cogis/parallel.hpp"

#include <cmath>
#include <limits>

namespace cogis::refine {

using contact::DataPoint;

Vec compute_weights(const std::vector<DataPoint>& memory, const std::vector<DataPoint>& active,
                    const gp::KernelParams& params) {
  require(!active.empty(), "compute_weights: empty active set");
  const Eigen::Index dim = active.front().point.size();
  const Mat a = contact::to_training_set(active, dim).points;
  Vec score = Vec::Zero(a.cols());
  if (!memory.empty()) {
    const Mat m = contact::to_training_set(memory, dim).points;
    score = gp::cross_kernel(a, m, params).rowwise().sum();
  }
  const Vec e = (score.array() - score.maxCoeff()).exp().matrix();
  return e / e.sum();
}

std::size_t Problem::free_count() const {
  std::size_t n = 0;
  for (bool f : fixed) n += f ? 0 : 1;
  return n;
}

double phi(const Problem& problem, const Mask& omega) {
  require(omega.size() == problem.size(), "phi: omega length differs from problem size");
  double kept = 0.0;
  for (std::size_t j = 0; j < omega.size(); ++j) {
    require(omega[j] || !problem.fixed[j], "phi: fixed entry set to 0");
    if (omega[j]) kept += problem.weights[static_cast<Eigen::Index>(j)];
  }
  return -kept + kPenalty * (problem.feasible(omega) ? 0.0 : 1.0);
}

CmawmResult run_cmawm(const Problem& problem, const CmawmOptions& options) {
  require(options.generations >= 1, "CMAwM needs at least one generation");
  require(options.population >= 4, "CMAwM population must be at least 4");
  require(static_cast<std::size_t>(problem.weights.size()) == problem.size(),
          "weight vector length differs from problem size");

  const std::size_t m = problem.size();
  std::vector<std::size_t> free_idx;
  for (std::size_t j = 0; j < m; ++j)
    if (!problem.fixed[j]) free_idx.push_back(j);

  CmawmResult result;
  result.omega.assign(m, true);
  result.phi = -problem.weights.sum();
  double best = -std::numeric_limits<double>::infinity();

  auto dot = [&](const Mask& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (w[j]) s += problem.weights[static_cast<Eigen::Index>(j)];
    return s;
  };

  const Mask ones(m, true);
  ++result.evaluations;
  if (problem.feasible(ones)) {
    result.found_feasible = true;
    best = dot(ones);
    result.phi = -best;
  }
  if (free_idx.empty()) return result;

  Cmawm es(static_cast<Eigen::Index>(free_idx.size()), options.population, options.seed);
  const auto lambda = static_cast<std::size_t>(options.population);
  for (int gen = 0; gen < options.generations; ++gen) {
    const Mat x = es.ask();
    std::vector<Mask> omegas(lambda, ones);
    for (std::size_t k = 0; k < lambda; ++k) {
      const std::vector<bool> bits = Cmawm::binarize(x.col(static_cast<Eigen::Index>(k)));
      for (std::size_t f = 0; f < free_idx.size(); ++f) omegas[k][free_idx[f]] = bits[f];
    }
    std::vector<char> ok(lambda, 0);
    parallel_for(lambda, options.threads,
                 [&](std::size_t k) { ok[k] = problem.feasible(omegas[k]) ? 1 : 0; });
    result.evaluations += options.population;

    std::vector<double> values(lambda);
    for (std::size_t k = 0; k < lambda; ++k) {
      const double kept = dot(omegas[k]);
      values[k] = -kept + (ok[k] ? 0.0 : kPenalty);
      if (ok[k] && kept > best) {
        best = kept;
        result.omega = omegas[k];
        result.found_feasible = true;
        result.phi = -kept;
      }
    }
    es.tell(x, values);
    result.generations_used = gen + 1;
  }

  int budget = options.polish_budget;
  while (result.found_feasible && budget > 0) {
    struct Move {
      double gain;
      std::size_t add, drop;  // drop == m for a pure add
    };
    std::vector<Move> moves;
    for (std::size_t i : free_idx) {
      if (result.omega[i]) continue;
      const double ci = problem.weights[static_cast<Eigen::Index>(i)];
      moves.push_back({ci, i, m});
      for (std::size_t j : free_idx) {
        const double cj = problem.weights[static_cast<Eigen::Index>(j)];
        if (result.omega[j] && cj < ci) moves.push_back({ci - cj, i, j});
      }
    }
    std::stable_sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.gain > b.gain; });
    bool improved = false;
    for (std::size_t start = 0; start < moves.size() && budget > 0 && !improved;) {
      const std::size_t count = std::min({moves.size() - start, static_cast<std::size_t>(budget),
                                          static_cast<std::size_t>(options.population)});
      std::vector<Mask> trial(count, result.omega);
      for (std::size_t k = 0; k < count; ++k) {
        trial[k][moves[start + k].add] = true;
        if (moves[start + k].drop < m) trial[k][moves[start + k].drop] = false;
      }
      std::vector<char> ok(count, 0);
      parallel_for(count, options.threads, [&](std::size_t k) { ok[k] = problem.feasible(trial[k]) ? 1 : 0; });
      result.evaluations += static_cast<int>(count);
      budget -= static_cast<int>(count);
      for (std::size_t k = 0; k < count && !improved; ++k)
        if (ok[k]) {
          result.omega = trial[k];
          best = dot(result.omega);
          result.phi = -best;
          improved = true;
        }
      start += count;
    }
    if (!improved) break;
  }
  return result;
}

SubsetEvaluator::SubsetEvaluator(const constraints::ConstraintSet& set, const Gpis& base,
                                 const std::vector<DataPoint>& active,
                                 const constraints::Context& ctx)
    : set_(set), ctx_(ctx), params_(base.params()), prior_mean_(base.prior_mean()) {
  require(!set.empty(), "a constraint set needs at least one constraint");
  const gp::TrainingSet train = contact::to_training_set(active, base.dim());
  gram_ = gp::cross_kernel(train.points, train.points, params_);
  labels_ = train.labels.array() - prior_mean_;
  const FreeSpaceOracle* oracle = base.oracle().get();
  for (const auto& c : set.items()) {
    Block b;
    const Mat q = c->queries(ctx);
    b.cross = gp::cross_kernel(q, train.points, params_);
    b.visibly_free.assign(static_cast<std::size_t>(q.cols()), false);
    if (oracle)
      for (Eigen::Index i = 0; i < q.cols(); ++i)
        b.visibly_free[static_cast<std::size_t>(i)] = oracle->visibly_free(q.col(i));
    blocks_.push_back(std::move(b));
  }
}

void SubsetEvaluator::predict(const Mask& keep, std::size_t index, Vec* means,
                              Vec* variances) const {
  require(keep.size() == static_cast<std::size_t>(labels_.size()), "subset mask length differs");
  std::vector<Eigen::Index> idx;
  for (std::size_t j = 0; j < keep.size(); ++j)
    if (keep[j]) idx.push_back(static_cast<Eigen::Index>(j));
  const Block& b = blocks_[index];
  const Eigen::Index q = b.cross.rows();
  const auto s = static_cast<Eigen::Index>(idx.size());

  if (s == 0) {
    if (means) *means = Vec::Constant(q, prior_mean_);
    if (variances) *variances = Vec::Constant(q, params_.outputscale);
  } else {
    Mat k = gram_(idx, idx);
    k.diagonal().array() += params_.noise;
    const gp::JitteredCholesky chol = gp::factorize(k);
    const Mat cross = b.cross(Eigen::all, idx);
    if (means) {
      const Vec alpha = chol.llt.solve(Vec(labels_(idx)));
      *means = (cross * alpha).array() + prior_mean_;
    }
    if (variances) {
      const Mat v = chol.llt.matrixL().solve(Mat(cross.transpose()));
      *variances = (params_.outputscale - v.colwise().squaredNorm().array()).cwiseMax(0.0).matrix().transpose();
    }
  }
  if (means)
    for (Eigen::Index i = 0; i < q; ++i)
      if (b.visibly_free[static_cast<std::size_t>(i)]) (*means)[i] = 1.0;
}

bool SubsetEvaluator::operator()(const Mask& keep) const {
  for (std::size_t c = 0; c < blocks_.size(); ++c) {
    const auto& constraint = set_.items()[c];
    Vec means;
    Vec variances;
    predict(keep, c, &means, constraint->needs_variance() ? &variances : nullptr);
    if (!constraint->decide(means, variances, ctx_)) return false;
  }
  return true;
}

RefineOutcome refine_contacts(contact::DatasetPair dp, const constraints::ConstraintSet& set,
                              const Gpis& base, const constraints::Context& ctx,
                              const CmawmOptions& options) {
  RefineOutcome out;
  out.event.active_before = dp.active.size();

  auto purge = [](std::vector<DataPoint>& data) {
    std::size_t n = 0;
    std::vector<DataPoint> kept;
    kept.reserve(data.size());
    for (auto& p : data) {
      if (p.local_min)
        ++n;
      else
        kept.push_back(std::move(p));
    }
    data = std::move(kept);
    return n;
  };
  out.event.purged = purge(dp.active);
  purge(dp.memory);

  if (dp.active.empty()) {
    out.event.active_after = 0;
    out.datasets = std::move(dp);
    return out;
  }

  Problem problem;
  problem.weights = compute_weights(dp.memory, dp.active, base.params());
  problem.fixed.resize(dp.active.size());
  for (std::size_t j = 0; j < dp.active.size(); ++j)
    problem.fixed[j] = !(dp.active[j].removable() && dp.active[j].interior());
  const SubsetEvaluator evaluator(set, base, dp.active, ctx);
  problem.feasible = [&evaluator](const Mask& keep) { return evaluator(keep); };

  const CmawmResult r = run_cmawm(problem, options);
  out.event.generations = r.generations_used;
  out.event.found_feasible = r.found_feasible;
  out.event.phi = r.phi;

  if (r.found_feasible) {
    std::vector<DataPoint> kept;
    for (std::size_t j = 0; j < dp.active.size(); ++j) {
      if (r.omega[j])
        kept.push_back(dp.active[j]);
      else
        out.removed_points.push_back(dp.active[j]);
    }
    dp.active = std::move(kept);
  }
  out.event.removed = out.removed_points.size();
  out.event.active_after = dp.active.size();
  out.datasets = std::move(dp);
  return out;
}

}  // namespace cogis::refine

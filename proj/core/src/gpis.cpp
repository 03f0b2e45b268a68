#include "cogis/gpis.hpp"

#include "cogis/normal.hpp"

#include <cmath>

namespace cogis {

gp::TrainingSet dedup_latest(const gp::TrainingSet& set) {
  const Eigen::Index m = set.size();
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    bool superseded = false;
    for (Eigen::Index j = i + 1; j < m && !superseded; ++j)
      superseded = (set.points.col(i) - set.points.col(j)).norm() <= kDuplicateTolerance;
    if (!superseded) keep.push_back(i);
  }
  if (static_cast<Eigen::Index>(keep.size()) == m) return set;
  gp::TrainingSet out(Mat(set.dim(), static_cast<Eigen::Index>(keep.size())),
                      Vec(static_cast<Eigen::Index>(keep.size())));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.points.col(static_cast<Eigen::Index>(k)) = set.points.col(keep[k]);
    out.labels[static_cast<Eigen::Index>(k)] = set.labels[keep[k]];
  }
  return out;
}

void apply_free_space_override(const FreeSpaceOracle* oracle, const Mat& queries, Vec& means) {
  if (!oracle) return;
  for (Eigen::Index i = 0; i < queries.cols(); ++i)
    if (oracle->visibly_free(queries.col(i))) means[i] = 1.0;
}

Gpis::Gpis(Eigen::Index dim, gp::KernelParams params, std::shared_ptr<const FreeSpaceOracle> oracle)
    : Gpis(dim, params, std::move(oracle), gp::TrainingSet::empty(dim), {}, 0.0) {}

Gpis::Gpis(Eigen::Index dim, gp::KernelParams params, std::shared_ptr<const FreeSpaceOracle> oracle,
           gp::TrainingSet active, std::vector<Vec> goal_seeds, double prior_mean)
    : dim_(dim),
      params_(params),
      oracle_(std::move(oracle)),
      goal_seeds_(std::move(goal_seeds)),
      prior_mean_(prior_mean) {
  require(dim > 0, "GPIS dimension must be positive");
  require(active.is_empty() || active.dim() == dim, "GPIS training dimension mismatch");
  require((active.labels.array().abs() <= 1.0).all(), "GPIS labels must lie in [-1, 1]");
  require(std::isfinite(prior_mean), "GPIS prior mean must be finite");
  if (active.is_empty()) active = gp::TrainingSet::empty(dim);
  active_ = dedup_latest(active);
  gp::TrainingSet centered = active_;
  centered.labels.array() -= prior_mean_;
  posterior_ = std::make_shared<const gp::Posterior>(std::move(centered), params_);
}

Gpis Gpis::seed_with_goal(const std::vector<Vec>& goals) const {
  require(!goals.empty(), "goal set must be non-empty");
  const gp::TrainingSet& cur = active();
  std::vector<Vec> seeds = goal_seeds_;
  std::vector<Vec> fresh;
  for (const Vec& g : goals) {
    require(g.size() == dim_, "goal dimension mismatch");
    bool known = false;
    for (const Vec& s : seeds) known = known || (s - g).norm() <= kDuplicateTolerance;
    for (const Vec& s : fresh) known = known || (s - g).norm() <= kDuplicateTolerance;
    if (!known) fresh.push_back(g);
  }
  gp::TrainingSet next(Mat(dim_, cur.size() + static_cast<Eigen::Index>(fresh.size())),
                       Vec(cur.size() + static_cast<Eigen::Index>(fresh.size())));
  next.points.leftCols(cur.size()) = cur.points;
  next.labels.head(cur.size()) = cur.labels;
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    next.points.col(cur.size() + static_cast<Eigen::Index>(k)) = fresh[k];
    next.labels[cur.size() + static_cast<Eigen::Index>(k)] = 1.0;
    seeds.push_back(fresh[k]);
  }
  return Gpis(dim_, params_, oracle_, std::move(next), std::move(seeds), prior_mean_);
}

Gpis Gpis::with_training(gp::TrainingSet active) const {
  return Gpis(dim_, params_, oracle_, std::move(active), goal_seeds_, prior_mean_);
}

Gpis Gpis::with_params(const gp::KernelParams& params) const {
  return Gpis(dim_, params, oracle_, active_, goal_seeds_, prior_mean_);
}

Gpis Gpis::with_prior_mean(double prior_mean) const {
  return Gpis(dim_, params_, oracle_, active_, goal_seeds_, prior_mean);
}

Gpis Gpis::with_oracle(std::shared_ptr<const FreeSpaceOracle> oracle) const {
  Gpis copy = *this;
  copy.oracle_ = std::move(oracle);
  return copy;
}

gp::PosteriorStats Gpis::predict_raw(const Eigen::Ref<const Vec>& x) const {
  require(x.size() == dim_, "query dimension mismatch");
  gp::PosteriorStats s = posterior_->at(x);
  s.mean += prior_mean_;
  return s;
}

gp::PosteriorStats Gpis::predict(const Eigen::Ref<const Vec>& x) const {
  gp::PosteriorStats s = predict_raw(x);
  if (oracle_ && oracle_->visibly_free(x)) s.mean = 1.0;
  return s;
}

void Gpis::predict_batch(const Mat& queries, Vec* means, Vec* variances) const {
  require(queries.rows() == dim_, "query dimension mismatch");
  posterior_->predict(queries, means, variances);
  if (means) means->array() += prior_mean_;
  if (means) apply_free_space_override(oracle_.get(), queries, *means);
}

double Gpis::lcb(const Eigen::Ref<const Vec>& x, double zeta) const {
  require(zeta > 0.0 && zeta < 1.0, "lcb: zeta must lie in (0, 1)");
  const gp::PosteriorStats s = predict(x);
  if (s.variance <= 0.0) return s.mean;
  return s.mean + inv_norm_cdf(zeta) * std::sqrt(s.variance);
}

OccupancyGrid Gpis::occupancy_grid(const Box& bounds, double resolution) const {
  require(bounds.dim() == dim_, "grid bounds dimension mismatch");
  OccupancyGrid grid = OccupancyGrid::covering(bounds, resolution);
  Vec means;
  predict_batch(grid.cell_centers(), &means, nullptr);
  for (std::size_t i = 0; i < grid.cells.size(); ++i)
    grid.cells[i] = means[static_cast<Eigen::Index>(i)] <= 0.0;
  return grid;
}

}  // namespace cogis

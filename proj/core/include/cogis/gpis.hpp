#pragma once

#include "cogis/gp.hpp"
#include "cogis/grid.hpp"
#include "cogis/types.hpp"

#include <memory>
#include <vector>

namespace cogis {

/// Answers whether a point is known to be in free space from vision alone.
class FreeSpaceOracle {
 public:
  virtual ~FreeSpaceOracle() = default;
  [[nodiscard]] virtual bool visibly_free(const Eigen::Ref<const Vec>& x) const = 0;
};

/// Points closer than this are treated as the same training location.
inline constexpr double kDuplicateTolerance = 1e-9;

/// Drops earlier duplicates so each location keeps its most recent label.
gp::TrainingSet dedup_latest(const gp::TrainingSet& set);

/// Gaussian-process implicit surface: negative mean inside obstacles,
/// positive outside, zero on the surface.
///
/// A Gpis is an immutable value. Updates return a new Gpis sharing nothing
/// mutable with the old one, so readers may query concurrently.
class Gpis {
 public:
  explicit Gpis(Eigen::Index dim, gp::KernelParams params = {},
                std::shared_ptr<const FreeSpaceOracle> oracle = nullptr);

  /// Adds each goal point with label 1. Seeding the same point twice is a no-op.
  [[nodiscard]] Gpis seed_with_goal(const std::vector<Vec>& goals) const;
  /// Replaces the conditioning set. The caller keeps goal seeds in `active`.
  [[nodiscard]] Gpis with_training(gp::TrainingSet active) const;
  [[nodiscard]] Gpis with_params(const gp::KernelParams& params) const;
  [[nodiscard]] Gpis with_oracle(std::shared_ptr<const FreeSpaceOracle> oracle) const;
  /// Constant prior mean m0: the GP models labels - m0 and predictions add m0
  /// back. Zero by default.
  [[nodiscard]] Gpis with_prior_mean(double prior_mean) const;

  /// Posterior with the free-space override: visibly free points get mean +1,
  /// variance untouched.
  [[nodiscard]] gp::PosteriorStats predict(const Eigen::Ref<const Vec>& x) const;
  /// Posterior without the override.
  [[nodiscard]] gp::PosteriorStats predict_raw(const Eigen::Ref<const Vec>& x) const;
  /// Batched predict over columns of `queries`. Means are post-processed;
  /// variances are always raw. Either output may be nullptr.
  void predict_batch(const Mat& queries, Vec* means, Vec* variances) const;

  /// mu + Phi^{-1}(zeta) * sqrt(var) on the post-processed mean.
  [[nodiscard]] double lcb(const Eigen::Ref<const Vec>& x, double zeta) const;

  /// Cell occupied iff the post-processed mean at its center is <= 0.
  [[nodiscard]] OccupancyGrid occupancy_grid(const Box& bounds, double resolution) const;

  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] const gp::TrainingSet& active() const { return active_; }
  [[nodiscard]] double prior_mean() const { return prior_mean_; }
  [[nodiscard]] const gp::KernelParams& params() const { return params_; }
  [[nodiscard]] const std::vector<Vec>& goal_seeds() const { return goal_seeds_; }
  [[nodiscard]] const std::shared_ptr<const FreeSpaceOracle>& oracle() const { return oracle_; }
  [[nodiscard]] const gp::Posterior& posterior() const { return *posterior_; }

 private:
  Gpis(Eigen::Index dim, gp::KernelParams params, std::shared_ptr<const FreeSpaceOracle> oracle,
       gp::TrainingSet active, std::vector<Vec> goal_seeds, double prior_mean);

  Eigen::Index dim_;
  gp::KernelParams params_;
  std::shared_ptr<const FreeSpaceOracle> oracle_;
  std::vector<Vec> goal_seeds_;
  double prior_mean_ = 0.0;
  gp::TrainingSet active_;
  std::shared_ptr<const gp::Posterior> posterior_;  // over labels - prior_mean_
};

/// Applies the free-space override to a batch of means in place.
void apply_free_space_override(const FreeSpaceOracle* oracle, const Mat& queries, Vec& means);

}  // namespace cogis

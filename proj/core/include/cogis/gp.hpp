#pragma once

#include "cogis/types.hpp"

#include <Eigen/Cholesky>

#include <vector>

namespace cogis::gp {

/// Matern kernel hyperparameters. Smoothness is fixed at nu = 3/2.
struct KernelParams {
  double lengthscale = 0.1;
  double outputscale = 1.0;  // sigma_f^2
  double noise = 1e-4;       // sigma_n^2

  static constexpr double nu = 1.5;

  void validate() const;
  bool operator==(const KernelParams&) const = default;
};

/// k(r) = sigma_f^2 (1 + sqrt(3) r / l) exp(-sqrt(3) r / l). Throws
/// ContractViolation for r < 0.
double matern32(double r, const KernelParams& p);

/// Labeled points; column j of `points` carries label `labels[j]`.
struct TrainingSet {
  Mat points;
  Vec labels;

  TrainingSet() = default;
  TrainingSet(Mat pts, Vec lbl) : points(std::move(pts)), labels(std::move(lbl)) { validate(); }
  static TrainingSet empty(Eigen::Index dim) { return TrainingSet(Mat(dim, 0), Vec(0)); }

  [[nodiscard]] Eigen::Index size() const { return labels.size(); }
  [[nodiscard]] Eigen::Index dim() const { return points.rows(); }
  [[nodiscard]] bool is_empty() const { return labels.size() == 0; }
  void validate() const;
};

struct PosteriorStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Cross-covariance matrix: result(i, j) = k(|a_i - b_j|). Columns are points.
Mat cross_kernel(const Mat& a, const Mat& b, const KernelParams& p);

/// Cholesky of a symmetric matrix with diagonal jitter escalation
/// (1e-8, 1e-7, ..., 1e-4). Throws SolverError if every attempt fails.
struct JitteredCholesky {
  Eigen::LLT<Mat> llt;
  double jitter = 0.0;
};
JitteredCholesky factorize(const Mat& symmetric);

/// Exact zero-mean GP posterior over a fixed training set. Factorizes once
/// on construction; all queries are const.
class Posterior {
 public:
  Posterior(TrainingSet train, KernelParams params);

  [[nodiscard]] PosteriorStats at(const Eigen::Ref<const Vec>& x) const;

  /// Batched prediction over the columns of `queries`. Pass nullptr for
  /// `variances` to skip the O(m^2) variance term.
  void predict(const Mat& queries, Vec* means, Vec* variances) const;

  [[nodiscard]] const TrainingSet& train() const { return train_; }
  [[nodiscard]] const KernelParams& params() const { return params_; }
  [[nodiscard]] const Vec& weights() const { return alpha_; }
  [[nodiscard]] double jitter() const { return jitter_; }

 private:
  TrainingSet train_;
  KernelParams params_;
  Eigen::LLT<Mat> llt_;
  Vec alpha_;
  double jitter_ = 0.0;
};

/// Single-query convenience over Posterior. Empty train returns the prior.
PosteriorStats gp_posterior(const TrainingSet& train, const KernelParams& p,
                            const Eigen::Ref<const Vec>& query);

/// Log marginal likelihood and its gradient with respect to
/// (log lengthscale, log outputscale, log noise).
struct LmlResult {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};
LmlResult log_marginal_likelihood(const TrainingSet& train, const KernelParams& p);

/// Which hyperparameters gradient ascent may move.
struct FitMask {
  bool lengthscale = true;
  bool outputscale = true;
  bool noise = true;
};

struct FitResult {
  KernelParams params;
  std::vector<double> lml_trace;  // LML after p0 and every accepted step
  bool aborted = false;           // a non-finite LML stopped the fit
};

/// Gradient ascent on the LML in log-parameter space with backtracking
/// halving (at most 10 halvings per step). Never returns parameters with a
/// lower LML than p0.
FitResult fit_hyperparams_traced(const TrainingSet& train, const KernelParams& p0, int steps,
                                 double lr, FitMask mask = {});

KernelParams fit_hyperparams(const TrainingSet& train, const KernelParams& p0, int steps,
                             double lr, FitMask mask = {});

}  // namespace cogis::gp

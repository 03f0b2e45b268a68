#pragma once

#include "cogis/rng.hpp"
#include "cogis/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace cogis::refine {

/// (mu/mu_w, lambda)-CMA-ES over a continuous relaxation of binary variables
/// (x_i >= 0.5 encodes 1), with a margin correction that keeps the marginal
/// probability of each coordinate's minority value at or above `margin`.
class Cmawm {
 public:
  Cmawm(Eigen::Index dim, int population, std::uint64_t seed, double initial_mean = 0.5,
        double initial_step = 0.25);

  /// Draws `population` continuous candidates (columns).
  [[nodiscard]] Mat ask();
  /// Updates the distribution from the last ask() and the candidates'
  /// objective values (lower is better). Ties rank by sample index.
  void tell(const Mat& candidates, const std::vector<double>& values);

  [[nodiscard]] static std::vector<bool> binarize(const Eigen::Ref<const Vec>& x);

  [[nodiscard]] const Vec& mean() const { return mean_; }
  [[nodiscard]] double step_size() const { return sigma_; }
  [[nodiscard]] const Mat& covariance() const { return cov_; }
  [[nodiscard]] double margin() const { return margin_; }
  [[nodiscard]] int generation() const { return generation_; }
  /// min(P(x_i < 0.5), P(x_i >= 0.5)) under the current sampling distribution.
  [[nodiscard]] double minority_probability(Eigen::Index i) const;

 private:
  void decompose();
  void apply_margin();

  Eigen::Index dim_;
  int lambda_;
  int mu_;
  Vec weights_;
  double mu_eff_;
  double c_sigma_, d_sigma_, c_c_, c1_, c_mu_, chi_n_;
  double margin_;

  Vec mean_;
  double sigma_;
  Mat cov_;
  Mat basis_;       // eigenvectors of cov_
  Vec axis_;        // sqrt eigenvalues of cov_
  Vec path_sigma_;
  Vec path_c_;
  Rng rng_;
  int generation_ = 0;
};

}  // namespace cogis::refine

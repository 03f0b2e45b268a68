#include "cogis/cmawm.hpp"

#include "cogis/normal.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cogis::refine {
namespace {
constexpr double kThreshold = 0.5;
constexpr double kEigenFloor = 1e-10;
}  // namespace

Cmawm::Cmawm(Eigen::Index dim, int population, std::uint64_t seed, double initial_mean,
             double initial_step)
    : dim_(dim), lambda_(population), rng_(seed) {
  require(dim >= 1, "CMAwM needs at least one variable");
  require(population >= 4, "CMAwM population must be at least 4");
  require(initial_step > 0.0, "CMAwM step size must be positive");

  const double n = static_cast<double>(dim);
  mu_ = lambda_ / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i) weights_[i] = std::log(mu_ + 0.5) - std::log(i + 1.0);
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) / ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  margin_ = 1.0 / (static_cast<double>(lambda_) * n);

  mean_ = Vec::Constant(dim, initial_mean);
  sigma_ = initial_step;
  cov_ = Mat::Identity(dim, dim);
  basis_ = Mat::Identity(dim, dim);
  axis_ = Vec::Ones(dim);
  path_sigma_ = Vec::Zero(dim);
  path_c_ = Vec::Zero(dim);
  apply_margin();
}

Mat Cmawm::ask() {
  Mat x(dim_, lambda_);
  for (int k = 0; k < lambda_; ++k) {
    Vec z(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) z[i] = rng_.normal();
    x.col(k) = mean_ + sigma_ * (basis_ * axis_.cwiseProduct(z));
  }
  return x;
}

void Cmawm::tell(const Mat& candidates, const std::vector<double>& values) {
  require(candidates.cols() == lambda_ && static_cast<int>(values.size()) == lambda_,
          "CMAwM tell: population size mismatch");
  std::vector<int> order(static_cast<std::size_t>(lambda_));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)]; });

  const Vec old_mean = mean_;
  Mat steps(dim_, mu_);
  for (int i = 0; i < mu_; ++i) steps.col(i) = (candidates.col(order[static_cast<std::size_t>(i)]) - old_mean) / sigma_;
  const Vec y_w = steps * weights_;
  mean_ = old_mean + sigma_ * y_w;

  // C^{-1/2} y_w
  const Vec whitened = basis_ * (basis_.transpose() * y_w).cwiseQuotient(axis_);
  path_sigma_ = (1.0 - c_sigma_) * path_sigma_ + std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * whitened;
  const double decay = 1.0 - std::pow(1.0 - c_sigma_, 2.0 * (generation_ + 1));
  const bool h_sigma =
      path_sigma_.norm() / std::sqrt(decay) < (1.4 + 2.0 / (static_cast<double>(dim_) + 1.0)) * chi_n_;
  path_c_ = (1.0 - c_c_) * path_c_ +
            (h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0) * y_w;

  Mat rank_mu = Mat::Zero(dim_, dim_);
  for (int i = 0; i < mu_; ++i) rank_mu += weights_[i] * steps.col(i) * steps.col(i).transpose();
  const double correction = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
  cov_ = (1.0 - c1_ - c_mu_) * cov_ + c1_ * (path_c_ * path_c_.transpose() + correction * cov_) +
         c_mu_ * rank_mu;
  cov_ = 0.5 * (cov_ + cov_.transpose());

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (path_sigma_.norm() / chi_n_ - 1.0));
  sigma_ = std::clamp(sigma_, 1e-8, 1e3);
  ++generation_;
  decompose();
  apply_margin();
}

void Cmawm::decompose() {
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov_);
  Vec values = eig.eigenvalues().cwiseMax(kEigenFloor);
  basis_ = eig.eigenvectors();
  cov_ = basis_ * values.asDiagonal() * basis_.transpose();
  axis_ = values.cwiseSqrt();
}

void Cmawm::apply_margin() {
  const double z_max = inv_norm_cdf(1.0 - margin_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    const double sd = sigma_ * std::sqrt(cov_(i, i));
    const double z = (mean_[i] - kThreshold) / sd;
    if (std::abs(z) > z_max) mean_[i] = kThreshold + std::copysign(z_max * sd, z);
  }
}

double Cmawm::minority_probability(Eigen::Index i) const {
  const double sd = sigma_ * std::sqrt(cov_(i, i));
  const double below = norm_cdf((kThreshold - mean_[i]) / sd);
  return std::min(below, 1.0 - below);
}

std::vector<bool> Cmawm::binarize(const Eigen::Ref<const Vec>& x) {
  std::vector<bool> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = x[i] >= kThreshold;
  return out;
}

}  // namespace cogis::refine

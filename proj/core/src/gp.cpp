#include "cogis/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cogis::gp {
namespace {

const double kSqrt3 = std::sqrt(3.0);

}  // namespace

void KernelParams::validate() const {
  require(lengthscale > 0.0 && std::isfinite(lengthscale), "lengthscale must be positive");
  require(outputscale > 0.0 && std::isfinite(outputscale), "outputscale must be positive");
  require(noise >= 0.0 && std::isfinite(noise), "noise must be non-negative");
}

double matern32(double r, const KernelParams& p) {
  require(r >= 0.0, "matern32: negative distance " + std::to_string(r));
  const double a = kSqrt3 * r / p.lengthscale;
  return p.outputscale * (1.0 + a) * std::exp(-a);
}

void TrainingSet::validate() const {
  require(points.cols() == labels.size(), "training points and labels differ in length");
}

Mat cross_kernel(const Mat& a, const Mat& b, const KernelParams& p) {
  Mat k(a.cols(), b.cols());
  const double inv_l = kSqrt3 / p.lengthscale;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const Eigen::ArrayXd scaled = (a.colwise() - b.col(j)).colwise().norm().transpose().array() * inv_l;
    k.col(j) = (p.outputscale * (1.0 + scaled) * (-scaled).exp()).matrix();
  }
  return k;
}

JitteredCholesky factorize(const Mat& symmetric) {
  JitteredCholesky out;
  out.llt.compute(symmetric);
  if (out.llt.info() == Eigen::Success) return out;
  for (double jitter = 1e-8; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
    Mat k = symmetric;
    k.diagonal().array() += jitter;
    out.llt.compute(k);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  throw SolverError("Gram matrix is not positive definite after jitter escalation to 1e-4");
}

Posterior::Posterior(TrainingSet train, KernelParams params)
    : train_(std::move(train)), params_(params) {
  params_.validate();
  train_.validate();
  if (train_.is_empty()) return;
  Mat k = cross_kernel(train_.points, train_.points, params_);
  k.diagonal().array() += params_.noise;
  auto chol = factorize(k);
  llt_ = std::move(chol.llt);
  jitter_ = chol.jitter;
  alpha_ = llt_.solve(train_.labels);
}

PosteriorStats Posterior::at(const Eigen::Ref<const Vec>& x) const {
  Vec mean(1);
  Vec var(1);
  predict(Mat(x), &mean, &var);
  return {mean[0], var[0]};
}

void Posterior::predict(const Mat& queries, Vec* means, Vec* variances) const {
  const Eigen::Index q = queries.cols();
  if (train_.is_empty()) {
    if (means) means->setZero(q);
    if (variances) variances->setConstant(q, params_.outputscale);
    return;
  }
  require(queries.rows() == train_.dim(), "query dimension does not match training data");
  Mat k_star = cross_kernel(train_.points, queries, params_);  // m x q
  if (means) *means = k_star.transpose() * alpha_;
  if (variances) {
    llt_.matrixL().solveInPlace(k_star);
    *variances = (params_.outputscale - k_star.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
  }
}

PosteriorStats gp_posterior(const TrainingSet& train, const KernelParams& p,
                            const Eigen::Ref<const Vec>& query) {
  if (!train.is_empty())
    require(train.dim() == query.size(), "query dimension does not match training data");
  return Posterior(train, p).at(query);
}

LmlResult log_marginal_likelihood(const TrainingSet& train, const KernelParams& p) {
  require(!train.is_empty(), "log marginal likelihood needs at least one point");
  p.validate();
  const Eigen::Index m = train.size();
  const Mat k = cross_kernel(train.points, train.points, p);
  Mat k_y = k;
  k_y.diagonal().array() += p.noise;
  const auto chol = factorize(k_y);
  const Vec alpha = chol.llt.solve(train.labels);
  const Mat l = chol.llt.matrixL();

  LmlResult out;
  out.value = -0.5 * train.labels.dot(alpha) - l.diagonal().array().log().sum() -
              0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);

  // dLML/dtheta = 1/2 tr((alpha alpha^T - K_y^{-1}) dK/dtheta)
  const Mat w = alpha * alpha.transpose() - chol.llt.solve(Mat::Identity(m, m));
  double g_len = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = kSqrt3 * (train.points.col(i) - train.points.col(j)).norm() / p.lengthscale;
      g_len += w(i, j) * p.outputscale * a * a * std::exp(-a);
    }
  }
  out.gradient[0] = 0.5 * g_len;
  out.gradient[1] = 0.5 * (w.array() * k.array()).sum();
  out.gradient[2] = 0.5 * p.noise * w.trace();
  return out;
}

FitResult fit_hyperparams_traced(const TrainingSet& train, const KernelParams& p0, int steps,
                                 double lr, FitMask mask) {
  require(steps >= 0, "fit_hyperparams: negative step count");
  FitResult result{p0, {}, false};
  if (steps == 0 || train.is_empty()) return result;

  auto to_params = [](const Eigen::Vector3d& theta) {
    return KernelParams{std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
  };
  const Eigen::Vector3d active(mask.lengthscale ? 1.0 : 0.0, mask.outputscale ? 1.0 : 0.0,
                               mask.noise ? 1.0 : 0.0);

  Eigen::Vector3d theta(std::log(p0.lengthscale), std::log(p0.outputscale),
                        std::log(std::max(p0.noise, 1e-300)));
  LmlResult current;
  try {
    current = log_marginal_likelihood(train, p0);
  } catch (const SolverError&) {
    result.aborted = true;
    return result;
  }
  if (!std::isfinite(current.value) || !current.gradient.allFinite()) {
    result.aborted = true;
    return result;
  }
  result.lml_trace.push_back(current.value);

  for (int step = 0; step < steps; ++step) {
    Eigen::Vector3d direction = lr * current.gradient.cwiseProduct(active);
    if (direction.norm() == 0.0) break;
    bool accepted = false;
    for (int halving = 0; halving <= 10; ++halving) {
      const Eigen::Vector3d trial = theta + direction;
      const KernelParams trial_params = to_params(trial);
      LmlResult next;
      try {
        next = log_marginal_likelihood(train, trial_params);
      } catch (const SolverError&) {
        next.value = -std::numeric_limits<double>::infinity();
      } catch (const ContractViolation&) {
        next.value = -std::numeric_limits<double>::infinity();
      }
      if (std::isnan(next.value) || !next.gradient.allFinite()) {
        result.aborted = true;
        return result;
      }
      if (std::isfinite(next.value) && next.value >= current.value) {
        theta = trial;
        current = next;
        result.params = to_params(theta);
        if (!mask.noise) result.params.noise = p0.noise;
        result.lml_trace.push_back(current.value);
        accepted = true;
        break;
      }
      direction *= 0.5;
    }
    if (!accepted) break;
  }
  return result;
}

KernelParams fit_hyperparams(const TrainingSet& train, const KernelParams& p0, int steps,
                             double lr, FitMask mask) {
  return fit_hyperparams_traced(train, p0, steps, lr, mask).params;
}

}  // namespace cogis::gp

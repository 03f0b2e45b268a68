#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogis {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a linear system cannot be factored even after jitter escalation.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
  Vec lo;
  Vec hi;

  [[nodiscard]] Eigen::Index dim() const { return lo.size(); }
  [[nodiscard]] bool contains(const Vec& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  [[nodiscard]] bool strictly_contains(const Vec& p) const {
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
  }
  [[nodiscard]] Box inflated(double margin) const {
    return Box{(lo.array() - margin).matrix(), (hi.array() + margin).matrix()};
  }
  [[nodiscard]] bool inside(const Box& outer) const {
    return (lo.array() >= outer.lo.array()).all() && (hi.array() <= outer.hi.array()).all();
  }
};

/// Ordered set of n tracked points of a grasped object; column i is component i.
class StateSet {
 public:
  StateSet() = default;
  explicit StateSet(Mat components) : components_(std::move(components)) {}
  StateSet(Eigen::Index dim, Eigen::Index n) : components_(Mat::Zero(dim, n)) {}

  static StateSet single(const Vec& point) {
    StateSet s(point.size(), 1);
    s.components_.col(0) = point;
    return s;
  }

  [[nodiscard]] Eigen::Index size() const { return components_.cols(); }
  [[nodiscard]] Eigen::Index dim() const { return components_.rows(); }
  [[nodiscard]] Vec component(Eigen::Index i) const { return components_.col(i); }
  [[nodiscard]] auto col(Eigen::Index i) { return components_.col(i); }
  [[nodiscard]] auto col(Eigen::Index i) const { return components_.col(i); }
  [[nodiscard]] const Mat& matrix() const { return components_; }
  [[nodiscard]] Mat& matrix() { return components_; }

  bool operator==(const StateSet& other) const {
    return components_.rows() == other.components_.rows() &&
           components_.cols() == other.components_.cols() && components_ == other.components_;
  }

 private:
  Mat components_;
};

/// Distance between two state components.
using DistanceFn = double (*)(const Eigen::Ref<const Vec>&, const Eigen::Ref<const Vec>&);

inline double euclidean(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
  return (a - b).norm();
}

/// Goal location for a subset of state components.
struct Goal {
  Eigen::Index component = 0;
  Vec point;
};

using GoalSet = std::vector<Goal>;

}  // namespace cogis

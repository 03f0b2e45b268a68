#pragma once

#include "cogis/contact.hpp"
#include "cogis/gpis.hpp"
#include "cogis/grid.hpp"
#include "cogis/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cogis::constraints {

/// Component id per cell for free cells, -1 for occupied cells. Free space is
/// 8-connected in 2D and 26-connected in 3D; ids are assigned in order of
/// the lowest linear index of each component.
std::vector<int> connected_components(const OccupancyGrid& grid);

/// True iff the cells holding `start` and every goal are free and share one
/// component. Points outside the grid count as blocked.
bool path_exists_on_grid(const OccupancyGrid& grid, const Eigen::Ref<const Vec>& start,
                         const std::vector<Vec>& goals);

/// Auxiliary arguments shared by all constraints.
struct Context {
  StateSet state;
  std::vector<Vec> goals;
};

/// A task constraint evaluated from surface predictions at a fixed set of
/// query points. Splitting queries from the decision lets refinement reuse
/// one cross-covariance matrix across many candidate subsets.
class Constraint {
 public:
  virtual ~Constraint() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// Query points (columns) this constraint needs predictions at.
  [[nodiscard]] virtual Mat queries(const Context& ctx) const = 0;
  [[nodiscard]] virtual bool needs_variance() const = 0;
  /// `means` are post-processed; `variances` are raw and empty unless
  /// needs_variance() is true.
  [[nodiscard]] virtual bool decide(const Vec& means, const Vec& variances,
                                    const Context& ctx) const = 0;

  [[nodiscard]] bool evaluate(const Gpis& surface, const Context& ctx) const;
};

/// A collision-free grid path joins the tracked component and every goal.
class PathExists final : public Constraint {
 public:
  PathExists(Box bounds, double resolution, Eigen::Index tracked_component = 0);
  [[nodiscard]] std::string name() const override { return "path_exists"; }
  [[nodiscard]] Mat queries(const Context& ctx) const override;
  [[nodiscard]] bool needs_variance() const override { return false; }
  [[nodiscard]] bool decide(const Vec& means, const Vec& variances, const Context& ctx) const override;

  [[nodiscard]] const Box& bounds() const { return bounds_; }
  [[nodiscard]] double resolution() const { return resolution_; }

 private:
  Box bounds_;
  double resolution_;
  Eigen::Index tracked_;
  OccupancyGrid layout_;
  Mat centers_;
};

/// No state component has lcb(x, zeta) <= 0.
class NoPenetration final : public Constraint {
 public:
  explicit NoPenetration(double zeta);
  [[nodiscard]] std::string name() const override { return "no_penetration"; }
  [[nodiscard]] Mat queries(const Context& ctx) const override { return ctx.state.matrix(); }
  [[nodiscard]] bool needs_variance() const override { return true; }
  [[nodiscard]] bool decide(const Vec& means, const Vec& variances, const Context& ctx) const override;
  [[nodiscard]] double zeta() const { return zeta_; }

 private:
  double zeta_;
  double quantile_;
};

bool path_exists(const Gpis& surface, const Eigen::Ref<const Vec>& state_point,
                 const std::vector<Vec>& goals, const Box& bounds, double resolution);
bool no_penetration(const Gpis& surface, const StateSet& state, double zeta);

/// Conjunction h_all over a non-empty constraint list.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<std::shared_ptr<const Constraint>> items);

  [[nodiscard]] bool evaluate(const Gpis& surface, const Context& ctx) const;
  [[nodiscard]] const std::vector<std::shared_ptr<const Constraint>>& items() const { return items_; }
  [[nodiscard]] bool empty() const { return items_.empty(); }

 private:
  std::vector<std::shared_ptr<const Constraint>> items_;
};

/// h_all on the subset {active_j : keep_j}, through a freshly conditioned
/// GPIS sharing `base`'s kernel parameters and free-space oracle.
bool h_all(const ConstraintSet& set, const Gpis& base, const std::vector<contact::DataPoint>& active,
           const std::vector<bool>& keep, const Context& ctx);

}  // namespace cogis::constraints

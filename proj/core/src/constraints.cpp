#include "cogis/constraints.hpp"

#include "cogis/normal.hpp"

#include <cmath>
#include <numeric>

namespace cogis::constraints {
namespace {

/// Union-find with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<int> connected_components(const OccupancyGrid& grid) {
  require(!grid.cells.empty(), "connected_components: empty grid");
  const int d = grid.dim();
  const std::size_t n = grid.cells.size();
  DisjointSets sets(n);

  // Half of the neighbor stencil suffices: each pair is visited once from the
  // cell with the larger linear index.
  std::vector<std::vector<int>> offsets;
  const int span = d == 3 ? 27 : 9;
  for (int code = 0; code < span; ++code) {
    std::vector<int> off(static_cast<std::size_t>(d));
    int c = code;
    bool zero = true;
    for (int k = 0; k < d; ++k) {
      off[static_cast<std::size_t>(k)] = c % 3 - 1;
      c /= 3;
      zero = zero && off[static_cast<std::size_t>(k)] == 0;
    }
    if (zero) continue;
    // The highest nonzero axis decides the sign of the linear offset.
    int last_nonzero = 0;
    for (int k = d - 1; k >= 0; --k)
      if (off[static_cast<std::size_t>(k)] != 0) {
        last_nonzero = off[static_cast<std::size_t>(k)];
        break;
      }
    if (last_nonzero < 0) offsets.push_back(off);
  }

  std::vector<int> idx(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.cells[i]) continue;
    idx = grid.unravel(i);
    for (const auto& off : offsets) {
      bool inside = true;
      std::vector<int> nb(idx);
      for (int k = 0; k < d && inside; ++k) {
        nb[static_cast<std::size_t>(k)] += off[static_cast<std::size_t>(k)];
        inside = nb[static_cast<std::size_t>(k)] >= 0 &&
                 nb[static_cast<std::size_t>(k)] < grid.shape[static_cast<std::size_t>(k)];
      }
      if (!inside) continue;
      const std::size_t j = grid.linear_index(nb);
      if (!grid.cells[j]) sets.unite(i, j);
    }
  }

  std::vector<int> labels(n, -1);
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.cells[i]) continue;
    const std::size_t r = sets.find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

bool path_exists_on_grid(const OccupancyGrid& grid, const Eigen::Ref<const Vec>& start,
                         const std::vector<Vec>& goals) {
  const auto start_cell = grid.cell_of(start);
  if (!start_cell || grid.occupied(*start_cell)) return false;
  std::vector<std::size_t> goal_cells;
  for (const Vec& g : goals) {
    const auto cell = grid.cell_of(g);
    if (!cell || grid.occupied(*cell)) return false;
    goal_cells.push_back(*cell);
  }
  const std::vector<int> labels = connected_components(grid);
  for (std::size_t c : goal_cells)
    if (labels[c] != labels[*start_cell]) return false;
  return true;
}

bool Constraint::evaluate(const Gpis& surface, const Context& ctx) const {
  const Mat q = queries(ctx);
  Vec means;
  Vec variances;
  surface.predict_batch(q, &means, needs_variance() ? &variances : nullptr);
  return decide(means, variances, ctx);
}

PathExists::PathExists(Box bounds, double resolution, Eigen::Index tracked_component)
    : bounds_(std::move(bounds)), resolution_(resolution), tracked_(tracked_component) {
  layout_ = OccupancyGrid::covering(bounds_, resolution_);
  centers_ = layout_.cell_centers();
}

Mat PathExists::queries(const Context&) const { return centers_; }

bool PathExists::decide(const Vec& means, const Vec&, const Context& ctx) const {
  require(tracked_ < ctx.state.size(), "path_exists: tracked component out of range");
  OccupancyGrid grid = layout_;
  for (std::size_t i = 0; i < grid.cells.size(); ++i)
    grid.cells[i] = means[static_cast<Eigen::Index>(i)] <= 0.0;
  return path_exists_on_grid(grid, ctx.state.col(tracked_), ctx.goals);
}

NoPenetration::NoPenetration(double zeta) : zeta_(zeta) {
  require(zeta > 0.0 && zeta < 1.0, "no_penetration: zeta must lie in (0, 1)");
  quantile_ = inv_norm_cdf(zeta);
}

bool NoPenetration::decide(const Vec& means, const Vec& variances, const Context&) const {
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double sd = variances[i] > 0.0 ? std::sqrt(variances[i]) : 0.0;
    if (means[i] + quantile_ * sd <= 0.0) return false;
  }
  return true;
}

bool path_exists(const Gpis& surface, const Eigen::Ref<const Vec>& state_point,
                 const std::vector<Vec>& goals, const Box& bounds, double resolution) {
  const OccupancyGrid grid = surface.occupancy_grid(bounds, resolution);
  return path_exists_on_grid(grid, state_point, goals);
}

bool no_penetration(const Gpis& surface, const StateSet& state, double zeta) {
  for (Eigen::Index i = 0; i < state.size(); ++i)
    if (surface.lcb(state.col(i), zeta) <= 0.0) return false;
  return true;
}

ConstraintSet::ConstraintSet(std::vector<std::shared_ptr<const Constraint>> items)
    : items_(std::move(items)) {
  require(!items_.empty(), "a constraint set needs at least one constraint");
}

bool ConstraintSet::evaluate(const Gpis& surface, const Context& ctx) const {
  require(!items_.empty(), "a constraint set needs at least one constraint");
  for (const auto& c : items_)
    if (!c->evaluate(surface, ctx)) return false;
  return true;
}

bool h_all(const ConstraintSet& set, const Gpis& base, const std::vector<contact::DataPoint>& active,
           const std::vector<bool>& keep, const Context& ctx) {
  require(keep.size() == active.size(), "h_all: keep vector length differs from dataset");
  std::vector<contact::DataPoint> subset;
  for (std::size_t j = 0; j < active.size(); ++j)
    if (keep[j]) subset.push_back(active[j]);
  const Gpis candidate = base.with_training(contact::to_training_set(subset, base.dim()));
  return set.evaluate(candidate, ctx);
}

}  // namespace cogis::constraints

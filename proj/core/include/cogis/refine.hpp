#pragma once

#include "cogis/constraints.hpp"
#include "cogis/contact.hpp"
#include "cogis/gp.hpp"
#include "cogis/gpis.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace cogis::refine {

/// c_j = softmax_j( sum_i k(active_j, memory_i) ). Requires a non-empty active set.
Vec compute_weights(const std::vector<contact::DataPoint>& memory,
                    const std::vector<contact::DataPoint>& active, const gp::KernelParams& params);

using Mask = std::vector<bool>;

/// Integer program over a keep-vector omega: maximize c^T omega subject to
/// feasible(omega), with `fixed` entries pinned to 1.
struct Problem {
  Vec weights;
  Mask fixed;
  std::function<bool(const Mask&)> feasible;

  [[nodiscard]] std::size_t size() const { return fixed.size(); }
  [[nodiscard]] std::size_t free_count() const;
};

/// -c^T omega + 10 (1 - h_all(omega)).
double phi(const Problem& problem, const Mask& omega);
inline constexpr double kPenalty = 10.0;

struct CmawmOptions {
  int generations = 25;
  int population = 20;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int polish_budget = 40;  // evaluations for the add/swap search after the last generation
};

struct CmawmResult {
  Mask omega;                 // best feasible keep-vector, all ones if none
  double phi = -1.0;          // phi(omega) when feasible
  bool found_feasible = false;
  int generations_used = 0;
  int evaluations = 0;
};

/// CMA-ES with margin over the free entries. The all-ones vector is scored
/// before the first generation so an unconstrained problem returns it. After
/// the last generation the best feasible vector is improved by single adds and
/// pairwise swaps, highest gain first, within `polish_budget` evaluations.
/// Deterministic for a given seed regardless of `threads`.
CmawmResult run_cmawm(const Problem& problem, const CmawmOptions& options);

/// h_all over subsets of one active set. Kernel matrices between the full
/// set and every constraint's query points are computed once; each subset
/// only refactors its own Gram matrix.
class SubsetEvaluator {
 public:
  SubsetEvaluator(const constraints::ConstraintSet& set, const Gpis& base,
                  const std::vector<contact::DataPoint>& active, const constraints::Context& ctx);

  [[nodiscard]] bool operator()(const Mask& keep) const;
  /// Post-processed means and raw variances of the subset GPIS at the
  /// queries of constraint `index`.
  void predict(const Mask& keep, std::size_t index, Vec* means, Vec* variances) const;

 private:
  struct Block {
    Mat cross;                       // queries x active
    std::vector<bool> visibly_free;  // per query
  };

  const constraints::ConstraintSet& set_;
  const constraints::Context& ctx_;
  gp::KernelParams params_;
  double prior_mean_;
  Mat gram_;  // active x active kernel, no noise
  Vec labels_;
  std::vector<Block> blocks_;
};

struct RefinementEvent {
  int step = -1;
  std::size_t active_before = 0;
  std::size_t active_after = 0;
  std::size_t purged = 0;   // local-minimum entries dropped before optimizing
  std::size_t removed = 0;  // entries dropped from the active set by omega* = 0
  int generations = 0;
  bool found_feasible = false;
  double phi = -1.0;
};

struct RefineOutcome {
  contact::DatasetPair datasets;
  RefinementEvent event;
  std::vector<contact::DataPoint> removed_points;
};

/// Purges local-minimum data from both datasets, then searches for the
/// heaviest subset of interior, non-seed active entries satisfying the
/// constraints. Removed entries stay in memory. `base` supplies the kernel
/// parameters, prior mean, and free-space oracle.
RefineOutcome refine_contacts(contact::DatasetPair dp, const constraints::ConstraintSet& set,
                              const Gpis& base, const constraints::Context& ctx,
                              const CmawmOptions& options);

}  // namespace cogis::refine

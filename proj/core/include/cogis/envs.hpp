#pragma once

#include "cogis/contact.hpp"
#include "cogis/types.hpp"

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cogis::envs {

/// Clearance kept between a resolved contact and the obstacle face.
inline constexpr double kContactGap = 1e-3;
/// Largest allowed relative change of a cable segment length per step.
inline constexpr double kMaxStrain = 0.01;

struct Obstacle {
  Box box;
  bool observable = true;
};

/// Axis-aligned boxes inside a workspace box. The workspace boundary acts as
/// an observable wall.
struct WorldGeometry {
  Box bounds;
  std::vector<Obstacle> obstacles;

  void validate() const;
  /// Obstacles the given model collides with.
  [[nodiscard]] std::vector<Box> solids(bool observable_only) const;
  /// True iff p lies inside some obstacle (closed box) of the model.
  [[nodiscard]] bool occupied(const Eigen::Ref<const Vec>& p, bool observable_only) const;
};

/// True iff the closed segment [a, b] meets the closed box.
bool segment_hits_box(const Vec& a, const Vec& b, const Box& box);

/// Moves `from` by `delta` among `solids`. A collision-free straight move is
/// taken as is; otherwise the move is applied one axis at a time (x first),
/// each stopping kContactGap short of the first face it reaches. The result
/// is clamped to `bounds`.
Vec slide(const std::vector<Box>& solids, const Box& bounds, const Vec& from, const Vec& delta);

/// Ground-truth world plus the nominal model f, which sees only observable
/// obstacles.
class Environment {
 public:
  virtual ~Environment() = default;

  [[nodiscard]] virtual std::unique_ptr<Environment> clone() const = 0;
  [[nodiscard]] virtual Eigen::Index control_dim() const = 0;
  /// Advances the true state by u (clamped to the control bounds).
  virtual const StateSet& step_truth(const Vec& u) = 0;
  /// Same physics against observable obstacles only.
  [[nodiscard]] virtual StateSet nominal(const StateSet& x, const Vec& u) const = 0;

  [[nodiscard]] const StateSet& state() const { return state_; }
  void set_state(StateSet s) { state_ = std::move(s); }
  [[nodiscard]] const WorldGeometry& world() const { return world_; }
  [[nodiscard]] double max_step() const { return max_step_; }
  [[nodiscard]] Vec u_min() const { return Vec::Constant(control_dim(), -max_step_); }
  [[nodiscard]] Vec u_max() const { return Vec::Constant(control_dim(), max_step_); }

 protected:
  Environment(WorldGeometry world, StateSet start, double max_step);
  [[nodiscard]] Vec clamp_control(const Vec& u) const;

  WorldGeometry world_;
  StateSet state_;
  double max_step_;
};

/// Point peg in the plane, one component, control = displacement.
class PegEnv final : public Environment {
 public:
  PegEnv(WorldGeometry world, Vec start, double max_step);

  [[nodiscard]] std::unique_ptr<Environment> clone() const override;
  [[nodiscard]] Eigen::Index control_dim() const override { return state_.dim(); }
  const StateSet& step_truth(const Vec& u) override;
  [[nodiscard]] StateSet nominal(const StateSet& x, const Vec& u) const override;

 private:
  [[nodiscard]] StateSet advance(const StateSet& x, const Vec& u, bool observable_only) const;
};

struct CableOptions {
  std::vector<Eigen::Index> gripped{0};
  int iterations = 20;
  double max_step = 0.02;
};

/// Quasi-static chain of k points with fixed rest length between neighbours,
/// solved by position-based dynamics. Control = stacked displacements of the
/// gripped points. If a step would stretch a segment past kMaxStrain, leave a
/// point inside an obstacle, or pass a segment through one, the gripper
/// motion is scaled back by bisection.
class CableEnv final : public Environment {
 public:
  CableEnv(WorldGeometry world, StateSet chain, CableOptions options);

  [[nodiscard]] std::unique_ptr<Environment> clone() const override;
  [[nodiscard]] Eigen::Index control_dim() const override;
  const StateSet& step_truth(const Vec& u) override;
  [[nodiscard]] StateSet nominal(const StateSet& x, const Vec& u) const override;

  [[nodiscard]] double rest_length() const { return rest_; }
  [[nodiscard]] const CableOptions& options() const { return options_; }
  /// Largest |segment length / rest - 1| of x.
  [[nodiscard]] double max_strain(const StateSet& x) const;

 private:
  [[nodiscard]] StateSet advance(const StateSet& x, const Vec& u, bool observable_only) const;
  [[nodiscard]] bool solve(const StateSet& start, const Vec& u, double fraction,
                           const std::vector<Box>& solids, StateSet& out) const;

  CableOptions options_;
  double rest_;
  std::vector<bool> is_gripped_;
};

/// Ray-casts every pixel against all obstacles (hidden ones included; hiding
/// comes from occlusion). Depth is measured along the optical axis.
contact::DepthData render_depth(const WorldGeometry& world, const contact::Camera& camera);

enum class Family { Peg, Cable };

struct Scene {
  std::string name;
  Family family = Family::Peg;
  WorldGeometry world;
  StateSet start;
  GoalSet goals;
  double goal_radius = 0.02;
  std::optional<contact::Camera> camera;
  double max_step = 0.02;
  CableOptions cable;
};

/// peg_u, peg_i, peg_t, cable_hook. Throws ConfigError for other names.
Scene make_scene(const std::string& name);
std::vector<std::string> scene_names();

/// Text scene: `bounds xmin ymin xmax ymax`, `box xmin ymin xmax ymax observable`,
/// `goal x y r_g`, `start x y` (peg) or `start x0 y0 x1 y1` (cable endpoints),
/// `camera x y yaw fov pixels`, optional `links k`, `step s`, `grip i...`.
/// A cable `goal` takes an optional fourth value, the tracked link (default k/2).
Scene read_scene(std::istream& in, const std::string& name);
Scene load_scene(const std::string& path);

std::unique_ptr<Environment> make_env(const Scene& scene);

/// Chain of k points evenly spaced from a to b.
StateSet straight_chain(const Vec& a, const Vec& b, int k);

}  // namespace cogis::envs

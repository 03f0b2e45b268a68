#include "cogis/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

namespace cogis::envs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBackoffs = 12;

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Box box2(double x0, double y0, double x1, double y1) { return Box{vec2(x0, y0), vec2(x1, y1)}; }

/// Entry parameter of the ray origin + t dir into the box, t in [t0, t1], or +inf.
double ray_box(const Vec& origin, const Vec& dir, const Box& box, double t0, double t1) {
  for (Eigen::Index a = 0; a < origin.size(); ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.lo[a] || origin[a] > box.hi[a]) return kInf;
      continue;
    }
    double ta = (box.lo[a] - origin[a]) / dir[a];
    double tb = (box.hi[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return kInf;
  }
  return t0;
}

/// Farthest reachable coordinate when moving `p` along axis `a` to `target`.
double clip_axis(const std::vector<Box>& solids, const Vec& p, Eigen::Index a, double target) {
  const double start = p[a];
  double limit = target;
  for (const Box& b : solids) {
    bool overlaps = true;
    for (Eigen::Index k = 0; k < p.size() && overlaps; ++k)
      if (k != a) overlaps = p[k] > b.lo[k] && p[k] < b.hi[k];
    if (!overlaps) continue;
    if (target > start && b.lo[a] >= start && b.lo[a] <= limit) limit = std::max(start, b.lo[a] - kContactGap);
    if (target < start && b.hi[a] <= start && b.hi[a] >= limit) limit = std::min(start, b.hi[a] + kContactGap);
  }
  return limit;
}

Vec clamp_to(const Box& bounds, const Vec& p) { return p.cwiseMax(bounds.lo).cwiseMin(bounds.hi); }

/// Moves p out of any solid it sits in, through a face `prev` was outside of.
Vec push_out(const std::vector<Box>& solids, const Vec& p, const Vec& prev) {
  Vec q = p;
  for (const Box& b : solids) {
    if (!b.contains(q)) continue;
    double best = kInf;
    Eigen::Index axis = -1;
    double value = 0.0;
    auto consider = [&](Eigen::Index a, double target, bool crossed) {
      const double cost = std::abs(target - q[a]) - (crossed ? 1e6 : 0.0);
      if (cost < best) {
        best = cost;
        axis = a;
        value = target;
      }
    };
    for (Eigen::Index a = 0; a < q.size(); ++a) {
      consider(a, b.lo[a] - kContactGap, prev[a] < b.lo[a]);
      consider(a, b.hi[a] + kContactGap, prev[a] > b.hi[a]);
    }
    q[axis] = value;
  }
  return q;
}

}  // namespace

void WorldGeometry::validate() const {
  require(bounds.lo.size() == bounds.hi.size() && bounds.dim() > 0, "workspace bounds malformed");
  require((bounds.lo.array() < bounds.hi.array()).all(), "workspace bounds empty");
  for (const Obstacle& o : obstacles) {
    require(o.box.dim() == bounds.dim(), "obstacle dimension differs from workspace");
    require((o.box.lo.array() <= o.box.hi.array()).all(), "obstacle box malformed");
    require(o.box.inside(bounds), "obstacle outside workspace bounds");
  }
}

std::vector<Box> WorldGeometry::solids(bool observable_only) const {
  std::vector<Box> out;
  for (const Obstacle& o : obstacles)
    if (o.observable || !observable_only) out.push_back(o.box);
  return out;
}

bool WorldGeometry::occupied(const Eigen::Ref<const Vec>& p, bool observable_only) const {
  const Vec q = p;
  for (const Obstacle& o : obstacles)
    if ((o.observable || !observable_only) && o.box.contains(q)) return true;
  return false;
}

bool segment_hits_box(const Vec& a, const Vec& b, const Box& box) {
  return std::isfinite(ray_box(a, b - a, box, 0.0, 1.0));
}

Vec slide(const std::vector<Box>& solids, const Box& bounds, const Vec& from, const Vec& delta) {
  const Vec target = from + delta;
  bool blocked = false;
  for (const Box& b : solids) blocked = blocked || segment_hits_box(from, target, b);
  if (!blocked) return clamp_to(bounds, target);
  Vec p = from;
  for (Eigen::Index a = 0; a < p.size(); ++a) p[a] = clip_axis(solids, p, a, from[a] + delta[a]);
  return clamp_to(bounds, p);
}

Environment::Environment(WorldGeometry world, StateSet start, double max_step)
    : world_(std::move(world)), state_(std::move(start)), max_step_(max_step) {
  world_.validate();
  require(max_step > 0.0, "max step must be positive");
  require(state_.size() >= 1 && state_.dim() == world_.bounds.dim(), "start state malformed");
  for (Eigen::Index i = 0; i < state_.size(); ++i)
    require(!world_.occupied(state_.col(i), false), "start state inside an obstacle");
}

Vec Environment::clamp_control(const Vec& u) const {
  require(u.size() == control_dim(), "control dimension mismatch");
  require(u.allFinite(), "control must be finite");
  return u.cwiseMax(-max_step_).cwiseMin(max_step_);
}

PegEnv::PegEnv(WorldGeometry world, Vec start, double max_step)
    : Environment(std::move(world), StateSet::single(start), max_step) {}

std::unique_ptr<Environment> PegEnv::clone() const { return std::make_unique<PegEnv>(*this); }

StateSet PegEnv::advance(const StateSet& x, const Vec& u, bool observable_only) const {
  return StateSet::single(slide(world_.solids(observable_only), world_.bounds, x.component(0), clamp_control(u)));
}

const StateSet& PegEnv::step_truth(const Vec& u) {
  state_ = advance(state_, u, false);
  return state_;
}

StateSet PegEnv::nominal(const StateSet& x, const Vec& u) const { return advance(x, u, true); }

CableEnv::CableEnv(WorldGeometry world, StateSet chain, CableOptions options)
    : Environment(std::move(world), std::move(chain), options.max_step), options_(std::move(options)) {
  require(state_.size() >= 2, "a cable needs at least two points");
  require(options_.iterations >= 1, "PBD needs at least one iteration");
  require(!options_.gripped.empty(), "a cable needs at least one gripped point");
  is_gripped_.assign(static_cast<std::size_t>(state_.size()), false);
  for (Eigen::Index g : options_.gripped) {
    require(g >= 0 && g < state_.size(), "gripped index out of range");
    is_gripped_[static_cast<std::size_t>(g)] = true;
  }
  rest_ = (state_.col(1) - state_.col(0)).norm();
  require(rest_ > 0.0, "cable rest length must be positive");
  require(max_strain(state_) <= kMaxStrain, "start chain is not evenly spaced");
}

std::unique_ptr<Environment> CableEnv::clone() const { return std::make_unique<CableEnv>(*this); }

Eigen::Index CableEnv::control_dim() const {
  return state_.dim() * static_cast<Eigen::Index>(options_.gripped.size());
}

double CableEnv::max_strain(const StateSet& x) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    worst = std::max(worst, std::abs((x.col(i + 1) - x.col(i)).norm() / rest_ - 1.0));
  return worst;
}

bool CableEnv::solve(const StateSet& start, const Vec& u, double fraction,
                     const std::vector<Box>& solids, StateSet& out) const {
  const Eigen::Index d = start.dim();
  const Eigen::Index k = start.size();
  Mat p = start.matrix();
  for (std::size_t g = 0; g < options_.gripped.size(); ++g) {
    const Eigen::Index idx = options_.gripped[g];
    const Vec delta = fraction * u.segment(static_cast<Eigen::Index>(g) * d, d);
    p.col(idx) = slide(solids, world_.bounds, start.component(idx), delta);
  }
  for (int it = 0; it < options_.iterations; ++it) {
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      const bool fa = is_gripped_[static_cast<std::size_t>(i)];
      const bool fb = is_gripped_[static_cast<std::size_t>(i + 1)];
      if (fa && fb) continue;
      const Vec diff = p.col(i + 1) - p.col(i);
      const double len = diff.norm();
      if (len < 1e-12) continue;
      const Vec corr = (len - rest_) / len * diff;
      if (fa) {
        p.col(i + 1) -= corr;
      } else if (fb) {
        p.col(i) += corr;
      } else {
        p.col(i) += 0.5 * corr;
        p.col(i + 1) -= 0.5 * corr;
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      if (is_gripped_[static_cast<std::size_t>(i)]) continue;
      p.col(i) = clamp_to(world_.bounds, push_out(solids, p.col(i), start.col(i)));
    }
  }
  out = StateSet(std::move(p));
  if (!out.matrix().allFinite() || max_strain(out) > kMaxStrain) return false;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (const Box& b : solids) {
      if (b.contains(out.component(i))) return false;
      if (i + 1 < k && segment_hits_box(out.component(i), out.component(i + 1), b)) return false;
    }
  }
  return true;
}

StateSet CableEnv::advance(const StateSet& x, const Vec& u, bool observable_only) const {
  const Vec step = clamp_control(u);
  const std::vector<Box> solids = world_.solids(observable_only);
  StateSet out;
  double fraction = 1.0;
  for (int attempt = 0; attempt <= kMaxBackoffs; ++attempt, fraction *= 0.5)
    if (solve(x, step, fraction, solids, out)) return out;
  return x;
}

const StateSet& CableEnv::step_truth(const Vec& u) {
  state_ = advance(state_, u, false);
  return state_;
}

StateSet CableEnv::nominal(const StateSet& x, const Vec& u) const { return advance(x, u, true); }

contact::DepthData render_depth(const WorldGeometry& world, const contact::Camera& camera) {
  require(camera.position.size() == 2 && world.bounds.dim() == 2, "depth rendering is planar");
  for (const Obstacle& o : world.obstacles)
    require(!o.box.contains(camera.position), "camera inside an obstacle");
  contact::DepthData data;
  data.depth.assign(static_cast<std::size_t>(camera.width), kInf);
  std::vector<Vec> hits;
  for (int px = 0; px < camera.width; ++px) {
    const Vec dir = camera.ray(px);
    double best = kInf;
    for (const Obstacle& o : world.obstacles) best = std::min(best, ray_box(camera.position, dir, o.box, 0.0, kInf));
    if (!std::isfinite(best)) continue;
    data.depth[static_cast<std::size_t>(px)] = best;
    hits.push_back(camera.position + best * dir);
  }
  data.points.resize(2, static_cast<Eigen::Index>(hits.size()));
  for (std::size_t j = 0; j < hits.size(); ++j) data.points.col(static_cast<Eigen::Index>(j)) = hits[j];
  return data;
}

StateSet straight_chain(const Vec& a, const Vec& b, int k) {
  require(k >= 2, "a chain needs at least two points");
  StateSet s(a.size(), k);
  for (int i = 0; i < k; ++i) s.col(i) = a + (b - a) * (static_cast<double>(i) / (k - 1));
  return s;
}

std::vector<std::string> scene_names() { return {"peg_u", "peg_i", "peg_t", "cable_hook"}; }

Scene make_scene(const std::string& name) {
  Scene s;
  s.name = name;
  if (name == "peg_u" || name == "peg_i" || name == "peg_t") {
    s.family = Family::Peg;
    s.world.bounds = box2(0.0, 0.0, 0.8, 0.8);
    s.goal_radius = 0.02;
    s.max_step = 0.03;
    auto wall = [&](double x0, double y0, double x1, double y1) {
      s.world.obstacles.push_back({box2(x0, y0, x1, y1), false});
    };
    if (name == "peg_u") {
      // Cup opening upward with inward lips; the goal sits just inside the mouth.
      wall(0.25, 0.30, 0.55, 0.34);
      wall(0.25, 0.30, 0.29, 0.56);
      wall(0.51, 0.30, 0.55, 0.56);
      wall(0.25, 0.52, 0.35, 0.56);
      wall(0.45, 0.52, 0.55, 0.56);
      s.start = StateSet::single(vec2(0.40, 0.12));
      s.goals = {Goal{0, vec2(0.40, 0.44)}};
    } else if (name == "peg_i") {
      wall(0.22, 0.38, 0.58, 0.42);
      s.start = StateSet::single(vec2(0.40, 0.15));
      s.goals = {Goal{0, vec2(0.40, 0.65)}};
    } else {
      wall(0.20, 0.44, 0.60, 0.48);
      wall(0.38, 0.24, 0.42, 0.44);
      s.start = StateSet::single(vec2(0.40, 0.10));
      s.goals = {Goal{0, vec2(0.40, 0.66)}};
    }
    return s;
  }
  if (name == "cable_hook") {
    s.family = Family::Cable;
    s.world.bounds = box2(0.0, 0.0, 1.0, 0.9);
    s.goal_radius = 0.04;
    s.max_step = 0.02;
    s.world.obstacles = {
        {box2(0.00, 0.40, 0.50, 0.44), true},   // overhead bar
        {box2(0.46, 0.34, 0.50, 0.40), false},  // hook lip under the bar's free end
        {box2(0.90, 0.62, 0.92, 0.76), true},   // barrier between camera and hook
    };
    const int k = 8;
    s.start = straight_chain(vec2(0.14, 0.35), vec2(0.42, 0.35), k);
    s.cable.gripped = {0, k - 1};
    s.cable.max_step = s.max_step;
    s.goals = {Goal{k / 2, vec2(0.74, 0.60)}};
    // looks down-left at the hook; the bar and barrier hide the lip
    s.camera = contact::Camera::from_fov(vec2(0.98, 0.80), -2.39, std::numbers::pi / 2.0, 128);
    return s;
  }
  throw ConfigError("unknown scene '" + name + "'");
}

Scene read_scene(std::istream& in, const std::string& name) {
  Scene s;
  s.name = name;
  std::vector<double> start;
  int links = 8;
  bool have_bounds = false;
  std::vector<Eigen::Index> grip;
  long goal_component = -1;  // cable default: the middle link
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<double> v;
    double x = 0.0;
    while (ls >> x) v.push_back(x);
    if (!ls.eof()) throw ConfigError("scene line " + std::to_string(lineno) + ": bad number");
    auto need = [&](std::size_t n) {
      if (v.size() != n)
        throw ConfigError("scene line " + std::to_string(lineno) + ": '" + key + "' expects " +
                          std::to_string(n) + " values");
    };
    if (key == "bounds") {
      need(4);
      s.world.bounds = box2(v[0], v[1], v[2], v[3]);
      have_bounds = true;
    } else if (key == "box") {
      need(5);
      s.world.obstacles.push_back({box2(v[0], v[1], v[2], v[3]), v[4] != 0.0});
    } else if (key == "goal") {
      if (v.size() != 3 && v.size() != 4)
        throw ConfigError("scene line " + std::to_string(lineno) + ": 'goal' expects 3 or 4 values");
      s.goals = {Goal{0, vec2(v[0], v[1])}};
      s.goal_radius = v[2];
      if (v.size() == 4) goal_component = static_cast<long>(v[3]);
    } else if (key == "start") {
      if (v.size() != 2 && v.size() != 4)
        throw ConfigError("scene line " + std::to_string(lineno) + ": 'start' expects 2 or 4 values");
      start = v;
    } else if (key == "camera") {
      need(5);
      s.camera = contact::Camera::from_fov(vec2(v[0], v[1]), v[2], v[3], static_cast<int>(v[4]));
    } else if (key == "links") {
      need(1);
      links = static_cast<int>(v[0]);
    } else if (key == "step") {
      need(1);
      s.max_step = v[0];
    } else if (key == "grip") {
      if (v.empty()) throw ConfigError("scene line " + std::to_string(lineno) + ": 'grip' needs indices");
      for (double g : v) grip.push_back(static_cast<Eigen::Index>(g));
    } else {
      throw ConfigError("scene line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  if (start.empty()) throw ConfigError("scene: missing 'start'");
  if (s.goals.empty()) throw ConfigError("scene: missing 'goal'");
  if (!have_bounds) s.world.bounds = box2(0.0, 0.0, 1.0, 1.0);
  if (start.size() == 2) {
    s.family = Family::Peg;
    s.start = StateSet::single(vec2(start[0], start[1]));
    if (goal_component > 0) throw ConfigError("scene: a peg has a single component");
  } else {
    s.family = Family::Cable;
    s.start = straight_chain(vec2(start[0], start[1]), vec2(start[2], start[3]), links);
    s.cable.gripped = grip.empty() ? std::vector<Eigen::Index>{links - 1} : grip;
    s.cable.max_step = s.max_step;
    if (goal_component >= links) throw ConfigError("scene: goal component out of range");
    s.goals.front().component = goal_component >= 0 ? goal_component : links / 2;
  }
  s.world.validate();
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  return read_scene(in, path);
}

std::unique_ptr<Environment> make_env(const Scene& scene) {
  if (scene.family == Family::Peg)
    return std::make_unique<PegEnv>(scene.world, scene.start.component(0), scene.max_step);
  CableOptions opts = scene.cable;
  opts.max_step = scene.max_step;
  return std::make_unique<CableEnv>(scene.world, scene.start, opts);
}

}  // namespace cogis::envs

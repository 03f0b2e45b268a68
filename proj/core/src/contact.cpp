#include "cogis/contact.hpp"

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cogis::contact {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_double(const std::string& token) {
  if (token == "inf") return kInf;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw IoError("depth: bad number '" + token + "'");
  return v;
}

/// Inserts or refreshes `entry` in `data`; returns true if anything changed.
bool upsert(std::vector<DataPoint>& data, const DataPoint& entry) {
  for (DataPoint& existing : data) {
    if ((existing.point - entry.point).norm() > kDuplicateTolerance) continue;
    if (existing.source == Source::GoalSeed) return false;
    existing.label = entry.label;
    existing.source = entry.source;
    existing.local_min = existing.local_min && entry.local_min;
    return true;
  }
  data.push_back(entry);
  return true;
}

}  // namespace

LabelBatch gen_labels(const Transition& t, DistanceFn d_x) {
  const Eigen::Index n = t.current.size();
  require(t.observed.size() == n && t.predicted.size() == n, "transition state sizes differ");
  LabelBatch b;
  b.observed_labels.resize(n);
  b.predicted_labels.resize(n);
  b.keep_observed.assign(static_cast<std::size_t>(n), false);
  b.keep_predicted.assign(static_cast<std::size_t>(n), false);
  b.contact_observed.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double predicted = d_x(t.current.col(i), t.predicted.col(i));
    double y = 1.0;
    if (predicted >= kMinPredictedDisplacement)
      y = std::min(d_x(t.current.col(i), t.observed.col(i)) / predicted, 1.0);
    b.observed_labels[i] = y;
    b.predicted_labels[i] = 2.0 * y - 1.0;
  }
  return b;
}

Camera Camera::from_fov(const Vec& position, double yaw, double fov, int width) {
  require(position.size() == 2, "camera position must be 2D");
  require(width > 0, "camera width must be positive");
  require(fov > 0.0 && fov < 3.1, "camera field of view must lie in (0, pi)");
  Camera c;
  c.position = position;
  c.yaw = yaw;
  c.width = width;
  c.principal = 0.5 * width;
  c.focal = c.principal / std::tan(0.5 * fov);
  return c;
}

double Camera::fov() const { return 2.0 * std::atan(principal / focal); }

std::optional<Camera::Projection> Camera::project(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != 2) return std::nullopt;
  const double dx = x[0] - position[0];
  const double dy = x[1] - position[1];
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const double depth = c * dx + s * dy;
  const double lateral = -s * dx + c * dy;
  if (depth <= 0.0) return std::nullopt;
  const double u = principal + focal * lateral / depth;
  if (!(u >= 0.0) || u >= static_cast<double>(width)) return std::nullopt;
  return Projection{static_cast<int>(std::floor(u)), depth};
}

Vec Camera::ray(int pixel) const {
  const double slope = (pixel + 0.5 - principal) / focal;
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Vec dir(2);
  dir << c - slope * s, s + slope * c;
  return dir;
}

void write_depth(std::ostream& out, const DepthData& data) {
  const auto d = data.points.rows() > 0 ? data.points.rows() : Eigen::Index{2};
  out << data.depth.size() << ' ' << d << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < data.depth.size(); ++i) {
    if (i > 0) out << ' ';
    if (std::isinf(data.depth[i]))
      out << "inf";
    else
      out << data.depth[i];
  }
  out << '\n';
  for (Eigen::Index j = 0; j < data.points.cols(); ++j) {
    for (Eigen::Index k = 0; k < d; ++k) out << (k > 0 ? " " : "") << data.points(k, j);
    out << '\n';
  }
}

DepthData read_depth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("depth: missing header");
  std::istringstream hs(line);
  std::size_t width = 0;
  int d = 0;
  if (!(hs >> width >> d) || d <= 0) throw IoError("depth: malformed header");
  DepthData data;
  if (!std::getline(in, line)) throw IoError("depth: missing depth row");
  std::istringstream ds(line);
  std::string token;
  while (ds >> token) data.depth.push_back(parse_double(token));
  if (data.depth.size() != width) throw IoError("depth: row length does not match width");
  std::vector<Vec> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ps(line);
    Vec p(d);
    for (int k = 0; k < d; ++k) {
      if (!(ps >> token)) throw IoError("depth: short point line");
      p[k] = parse_double(token);
    }
    pts.push_back(p);
  }
  data.points.resize(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t j = 0; j < pts.size(); ++j) data.points.col(static_cast<Eigen::Index>(j)) = pts[j];
  return data;
}

bool visible(const Eigen::Ref<const Vec>& x, const Camera& cam, const DepthData& data) {
  const auto proj = cam.project(x);
  if (!proj || proj->pixel >= static_cast<int>(data.depth.size())) return false;
  return proj->depth < data.depth[static_cast<std::size_t>(proj->pixel)] - kVisibilityMargin;
}

double distance_to_cloud(const Eigen::Ref<const Vec>& x, const Mat& cloud) {
  if (cloud.cols() == 0) return kInf;
  return (cloud.colwise() - x).colwise().norm().minCoeff();
}

LabelBatch pre_process(LabelBatch batch, const StateSet& observed, const Vision* vision,
                       double contact_radius, bool local_minimum) {
  require(contact_radius > 0.0, "contact radius must be positive");
  const Eigen::Index n = batch.size();
  require(observed.size() == n, "label batch and state sizes differ");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    bool vis = false;
    bool near_cloud = false;
    if (vision) {
      vis = visible(observed.col(i), vision->camera, vision->depth);
      near_cloud = distance_to_cloud(observed.col(i), vision->depth.points) < contact_radius;
    }
    const bool visibly_free = vis && !near_cloud;
    const bool visibly_touching = vis && near_cloud;
    if (visibly_free) batch.observed_labels[i] = 1.0;
    if (visibly_touching) batch.observed_labels[i] = 0.0;
    const bool occluded_interior = !visibly_free && batch.predicted_labels[i] < 0.0;
    batch.contact_observed[k] = visibly_touching || occluded_interior;
    batch.keep_observed[k] = visibly_touching || occluded_interior || local_minimum;
    batch.keep_predicted[k] = occluded_interior;
  }
  return batch;
}

bool check_local_minimum(const StateSet& saved, const StateSet& next, int period, double d_min,
                         DistanceFn d_x) {
  require(period >= 1, "local-minimum period must be positive");
  require(saved.size() == next.size() && next.size() > 0, "state sizes differ");
  double total = 0.0;
  for (Eigen::Index i = 0; i < next.size(); ++i) total += d_x(next.col(i), saved.col(i));
  return total / static_cast<double>(period) / static_cast<double>(next.size()) < d_min;
}

LocalMinimumDetector::LocalMinimumDetector(StateSet initial, int period, double d_min, DistanceFn d_x)
    : saved_(std::move(initial)), period_(period), d_min_(d_min), d_x_(d_x) {
  require(period >= 1, "local-minimum period must be positive");
}

bool LocalMinimumDetector::observe(const StateSet& next) {
  checked_last_ = false;
  if (++since_check_ < period_) return false;
  since_check_ = 0;
  checked_last_ = true;
  const bool stuck = check_local_minimum(saved_, next, period_, d_min_, d_x_);
  saved_ = next;
  return stuck;
}

const char* to_string(Source s) {
  switch (s) {
    case Source::Observed: return "observed";
    case Source::Predicted: return "predicted";
    case Source::GoalSeed: return "goal";
  }
  return "unknown";
}

std::vector<bool> DatasetPair::memory_mask() const {
  std::vector<bool> m;
  m.reserve(memory.size());
  for (const auto& p : memory) m.push_back(p.local_min);
  return m;
}

std::vector<bool> DatasetPair::active_mask() const {
  std::vector<bool> m;
  m.reserve(active.size());
  for (const auto& p : active) m.push_back(p.local_min);
  return m;
}

std::string DatasetPair::check_invariants() const {
  for (const DataPoint& a : active) {
    if (a.label < -1.0 || a.label > 1.0) return "active label outside [-1, 1]";
    if (a.source == Source::GoalSeed && (a.local_min || a.label != 1.0))
      return "goal seed must carry label 1 and no local-minimum flag";
    if (a.local_min) continue;
    bool found = false;
    for (const DataPoint& m : memory) found = found || m == a;
    if (!found) return "active entry missing from memory";
  }
  return {};
}

DatasetPair seed_goals(DatasetPair dp, const std::vector<Vec>& goals) {
  for (const Vec& g : goals) {
    const DataPoint seed{g, 1.0, Source::GoalSeed, false};
    bool known = false;
    for (const auto& a : dp.active) known = known || (a.point - g).norm() <= kDuplicateTolerance;
    if (known) continue;
    dp.active.push_back(seed);
    dp.memory.push_back(seed);
  }
  return dp;
}

UpdateResult update_datasets(DatasetPair dp, const LabelBatch& batch, const StateSet& observed,
                             const StateSet& predicted, bool local_minimum) {
  const Eigen::Index n = batch.size();
  require(observed.size() == n && predicted.size() == n, "label batch and state sizes differ");
  UpdateResult result;
  auto add = [&](const DataPoint& entry) {
    const bool changed = upsert(dp.active, entry);
    upsert(dp.memory, entry);
    if (changed) ++result.added;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool keep_obs = batch.keep_observed[k] || local_minimum;
    if (keep_obs) {
      const bool from_local_min = local_minimum && !batch.contact_observed[k];
      add(DataPoint{observed.component(i), batch.observed_labels[i], Source::Observed, from_local_min});
    }
    if (batch.keep_predicted[k])
      add(DataPoint{predicted.component(i), batch.predicted_labels[i], Source::Predicted, false});
  }
  result.datasets = std::move(dp);
  return result;
}

gp::TrainingSet to_training_set(const std::vector<DataPoint>& data, Eigen::Index dim) {
  gp::TrainingSet t(Mat(dim, static_cast<Eigen::Index>(data.size())),
                    Vec(static_cast<Eigen::Index>(data.size())));
  for (std::size_t j = 0; j < data.size(); ++j) {
    t.points.col(static_cast<Eigen::Index>(j)) = data[j].point;
    t.labels[static_cast<Eigen::Index>(j)] = data[j].label;
  }
  return t;
}

bool VisibilityOracle::visibly_free(const Eigen::Ref<const Vec>& x) const {
  return visible(x, vision_.camera, vision_.depth);
}

}  // namespace cogis::contact

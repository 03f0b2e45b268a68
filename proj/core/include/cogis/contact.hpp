#pragma once

#include "cogis/gp.hpp"
#include "cogis/gpis.hpp"
#include "cogis/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cogis::contact {

/// Predicted displacement below which a transition carries no contact signal.
inline constexpr double kMinPredictedDisplacement = 1e-6;
/// A point must sit this far in front of the depth surface to count as visible.
inline constexpr double kVisibilityMargin = 1e-4;

/// (X_t, u_t, X_{t+1}) plus the nominal prediction f(X_t, u_t).
struct Transition {
  StateSet current;
  Vec action;
  StateSet observed;
  StateSet predicted;
};

/// Labels for one transition. `observed_labels` (Y) live in [0, 1],
/// `predicted_labels` (Y_hat) in [-1, 1].
struct LabelBatch {
  Vec observed_labels;
  Vec predicted_labels;
  std::vector<bool> keep_observed;
  std::vector<bool> keep_predicted;
  /// Observed component kept as contact evidence (visibly in contact, or
  /// paired with an occluded interior prediction), as opposed to being kept
  /// only because a local minimum was detected.
  std::vector<bool> contact_observed;

  [[nodiscard]] Eigen::Index size() const { return observed_labels.size(); }
};

/// Y^i = min(d(X_t^i, X_{t+1}^i) / d(X_t^i, Xhat^i), 1), Y_hat = 2Y - 1.
/// Y^i = 1 when the predicted displacement is below kMinPredictedDisplacement.
LabelBatch gen_labels(const Transition& t, DistanceFn d_x = euclidean);

/// Static pinhole camera over a planar world; the image is a single pixel row.
struct Camera {
  Vec position;             // world frame, 2D
  double yaw = 0.0;         // optical axis direction (radians)
  double focal = 1.0;       // pixels
  double principal = 0.0;   // pixels
  int width = 0;            // pixels

  static Camera from_fov(const Vec& position, double yaw, double fov, int width);
  [[nodiscard]] double fov() const;

  struct Projection {
    int pixel;
    double depth;  // distance along the optical axis
  };
  /// Pixel and depth of `x`; nullopt when behind the camera or outside the image.
  [[nodiscard]] std::optional<Projection> project(const Eigen::Ref<const Vec>& x) const;
  /// World-frame ray through the center of `pixel`, scaled so its optical-axis
  /// component is 1 (a point at ray parameter t has depth t).
  [[nodiscard]] Vec ray(int pixel) const;
};

/// Depth row Z (per-pixel optical-axis depth, +inf for no hit) and the
/// point cloud P of hit points (columns).
struct DepthData {
  std::vector<double> depth;
  Mat points;
};

void write_depth(std::ostream& out, const DepthData& data);
DepthData read_depth(std::istream& in);

/// True iff x projects into the image with depth z < Z(u) - kVisibilityMargin.
bool visible(const Eigen::Ref<const Vec>& x, const Camera& cam, const DepthData& data);

/// Minimum distance from x to any point in the cloud (+inf for an empty cloud).
double distance_to_cloud(const Eigen::Ref<const Vec>& x, const Mat& cloud);

struct Vision {
  Camera camera;
  DepthData depth;
};

/// Label cleaning from visibility and point-cloud proximity. Without vision,
/// every component counts as not visible.
LabelBatch pre_process(LabelBatch batch, const StateSet& observed, const Vision* vision,
                       double contact_radius, bool local_minimum);

/// Average per-step, per-component displacement from the saved state is below
/// d_min. Strict inequality.
bool check_local_minimum(const StateSet& saved, const StateSet& next, int period, double d_min,
                         DistanceFn d_x = euclidean);

/// Runs check_local_minimum every `period` observed states and re-saves the
/// reference state at each check.
class LocalMinimumDetector {
 public:
  LocalMinimumDetector(StateSet initial, int period, double d_min, DistanceFn d_x = euclidean);

  /// Feed X_{t+1}; returns whether this step is a detected local minimum.
  bool observe(const StateSet& next);
  /// True when the most recent observe() ran a check.
  [[nodiscard]] bool checked_last() const { return checked_last_; }

 private:
  StateSet saved_;
  int period_;
  double d_min_;
  DistanceFn d_x_;
  int since_check_ = 0;
  bool checked_last_ = false;
};

enum class Source : std::uint8_t { Observed, Predicted, GoalSeed };

const char* to_string(Source s);

struct DataPoint {
  Vec point;
  double label = 0.0;
  Source source = Source::Observed;
  bool local_min = false;

  [[nodiscard]] bool removable() const { return source != Source::GoalSeed; }
  [[nodiscard]] bool interior() const { return label < 0.0; }
  bool operator==(const DataPoint&) const = default;
};

/// Memory dataset D and active dataset D_bar. The masks M and M_bar are the
/// `local_min` flags of the entries.
struct DatasetPair {
  std::vector<DataPoint> memory;
  std::vector<DataPoint> active;

  [[nodiscard]] std::vector<bool> memory_mask() const;
  [[nodiscard]] std::vector<bool> active_mask() const;
  /// Checks the bookkeeping invariants; returns an empty string when they hold.
  [[nodiscard]] std::string check_invariants() const;
};

/// Adds goal points (label 1, non-removable) to both datasets.
DatasetPair seed_goals(DatasetPair dp, const std::vector<Vec>& goals);

struct UpdateResult {
  DatasetPair datasets;
  int added = 0;  // points inserted or refreshed in the active set
};

/// Appends the kept observed/predicted points to both datasets. Local-minimum
/// additions never include predicted points. A location already present is
/// refreshed with the newest label instead of duplicated; once an entry is
/// contact evidence it is never downgraded to local-minimum data.
UpdateResult update_datasets(DatasetPair dp, const LabelBatch& batch, const StateSet& observed,
                             const StateSet& predicted, bool local_minimum);

gp::TrainingSet to_training_set(const std::vector<DataPoint>& data, Eigen::Index dim);

/// Free-space oracle backed by a static depth camera.
class VisibilityOracle final : public FreeSpaceOracle {
 public:
  explicit VisibilityOracle(Vision vision) : vision_(std::move(vision)) {}
  [[nodiscard]] bool visibly_free(const Eigen::Ref<const Vec>& x) const override;
  [[nodiscard]] const Vision& vision() const { return vision_; }

 private:
  Vision vision_;
};

}  // namespace cogis::contact

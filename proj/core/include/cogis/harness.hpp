#pragma once

#include "cogis/contact.hpp"
#include "cogis/envs.hpp"
#include "cogis/grid.hpp"
#include "cogis/refine.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cogis::harness {

struct EpisodeConfig {
  std::string scene = "peg_u";
  std::string scene_file;  // overrides `scene` when set
  std::uint64_t seed = 0;
  int max_steps = 750;

  // MPPI
  double lambda = 0.01;
  int samples = 500;
  int horizon = 15;
  double sigma = 0.2;  // per-dimension noise variance in units of max_step^2

  // cost
  double alpha = 0.590;
  double beta = 0.996;
  double eta = 11.03;
  double collision = 15.88;
  double goal_radius = 0.02;

  // contact and data
  double d_min = 0.01;
  int t_m = 5;
  int t_e = 0;  // 0 disables component reselection
  int t_fit = 3;
  double r_c = 0.01;
  double obs_noise = 0.0;

  // refinement and constraints
  int t_cma = 25;
  int population = 20;
  double zeta = 0.4;
  double grid_resolution = 0.0;  // 0 = goal_radius / 2

  // surface
  double prior_mean = 0.2;
  double lengthscale = 0.1;
  double outputscale = 1.0;
  double noise = 1e-4;
  int fit_steps = 10;
  double fit_lr = 0.05;
  double min_lengthscale = 0.05;
  double max_lengthscale = 0.3;
  double max_outputscale = std::numeric_limits<double>::infinity();

  // features (ablations switch these off)
  bool adaptive = true;  // GPIS in the cost; false = nominal-model-only baseline
  bool refinement = true;
  bool local_min = true;
  bool vision_pre = true;
  bool vision_post = true;

  unsigned threads = 1;

  /// Table II defaults for the scene's family.
  static EpisodeConfig defaults_for(const std::string& scene);
  void set(const std::string& key, const std::string& value);
  [[nodiscard]] std::string get(const std::string& key) const;
  [[nodiscard]] static std::vector<std::string> keys();
  void validate() const;
};

/// Flat `key = value` lines with `#` comments applied on top of `cfg`.
void apply_config(EpisodeConfig& cfg, std::istream& in);
EpisodeConfig load_config(const std::string& path, const EpisodeConfig& base);
/// Disables one feature: refinement, local_min, vision_pre, vision_post,
/// vision (both), or adaptive.
void ablate(EpisodeConfig& cfg, const std::string& feature);

struct StepRecord {
  int step = 0;
  StateSet state;  // observed state after the step
  Vec action;
  int added = 0;
  std::size_t memory_size = 0;
  std::size_t active_size = 0;
  bool local_min_checked = false;
  bool local_min = false;
  Eigen::Index explore_component = 0;
  std::optional<bool> constraints_ok;
  std::optional<refine::RefinementEvent> refinement;
  gp::KernelParams params;
};

struct EpisodeReport {
  std::string scene;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  std::string error;
  std::vector<StepRecord> log;
  std::vector<refine::RefinementEvent> refinements;
  std::vector<contact::DataPoint> removed_by_refinement;
  contact::DatasetPair datasets;
  std::vector<StateSet> trajectory;  // true states, including the start
  OccupancyGrid grid;
  envs::Scene scene_data;
  double wall_seconds = 0.0;
};

EpisodeReport run_episode(const EpisodeConfig& cfg);

/// Removed non-local-minimum points are still in memory, and no goal seed
/// was removed. Returns an empty string when the property holds.
std::string check_memory_property(const EpisodeReport& report);

struct BatchSummary {
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::optional<double> mean_steps;  // over successful episodes
  std::optional<double> ci_half_width;
};

BatchSummary summarize(const std::vector<EpisodeReport>& reports);
/// Runs one episode per seed; reports come back in seed order.
std::vector<EpisodeReport> run_batch(const EpisodeConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                     unsigned workers = 1);

/// One JSON object per line, one line per step.
void write_step_log(std::ostream& out, const EpisodeReport& report);
void write_report_json(std::ostream& out, const EpisodeReport& report);
void write_summary_json(std::ostream& out, const BatchSummary& summary);

struct SvgInput {
  envs::WorldGeometry world;
  std::vector<std::vector<Vec>> trajectories;
  std::vector<Vec> goals;
  double goal_radius = 0.0;
  std::optional<OccupancyGrid> grid;
};
void write_svg(std::ostream& out, const SvgInput& input);
SvgInput svg_input(const EpisodeReport& report);
/// Rebuilds the SVG input from a report written by write_report_json.
SvgInput read_svg_input(std::istream& report_json);

/// Writes steps.jsonl, grid.txt, report.json and episode.svg into `dir`.
void export_artifacts(const EpisodeReport& report, const std::string& dir, bool svg = true);

}  // namespace cogis::harness

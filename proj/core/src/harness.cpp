#include "cogis/harness.hpp"

#include "cogis/constraints.hpp"
#include "cogis/control.hpp"
#include "cogis/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <istream>
#include <ostream>
#include <sstream>

namespace cogis::harness {
namespace {

using nlohmann::json;

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  const double x = parse_real(key, v);
  if (x != std::floor(x)) throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// Binding between a config key and a field.
struct Field {
  std::function<void(EpisodeConfig&, const std::string&)> set;
  std::function<std::string(const EpisodeConfig&)> get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto real = [&](const std::string& key, double EpisodeConfig::*m) {
      t[key] = {[key, m](EpisodeConfig& c, const std::string& v) { c.*m = parse_real(key, v); },
                [m](const EpisodeConfig& c) { return fmt(c.*m); }};
    };
    auto integer = [&](const std::string& key, int EpisodeConfig::*m) {
      t[key] = {[key, m](EpisodeConfig& c, const std::string& v) { c.*m = static_cast<int>(parse_int(key, v)); },
                [m](const EpisodeConfig& c) { return std::to_string(c.*m); }};
    };
    auto flag = [&](const std::string& key, bool EpisodeConfig::*m) {
      t[key] = {[key, m](EpisodeConfig& c, const std::string& v) { c.*m = parse_bool(key, v); },
                [m](const EpisodeConfig& c) { return std::string(c.*m ? "1" : "0"); }};
    };
    t["scene"] = {[](EpisodeConfig& c, const std::string& v) { c.scene = v; },
                  [](const EpisodeConfig& c) { return c.scene; }};
    t["scene_file"] = {[](EpisodeConfig& c, const std::string& v) { c.scene_file = v; },
                       [](const EpisodeConfig& c) { return c.scene_file; }};
    t["seed"] = {[](EpisodeConfig& c, const std::string& v) {
                   const long long s = parse_int("seed", v);
                   if (s < 0) throw ConfigError("config key 'seed': must be non-negative");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const EpisodeConfig& c) { return std::to_string(c.seed); }};
    t["threads"] = {[](EpisodeConfig& c, const std::string& v) {
                      const long long n = parse_int("threads", v);
                      if (n < 1) throw ConfigError("config key 'threads': must be at least 1");
                      c.threads = static_cast<unsigned>(n);
                    },
                    [](const EpisodeConfig& c) { return std::to_string(c.threads); }};
    integer("max_steps", &EpisodeConfig::max_steps);
    real("lambda", &EpisodeConfig::lambda);
    integer("K", &EpisodeConfig::samples);
    integer("T", &EpisodeConfig::horizon);
    real("sigma", &EpisodeConfig::sigma);
    real("alpha", &EpisodeConfig::alpha);
    real("beta", &EpisodeConfig::beta);
    real("eta", &EpisodeConfig::eta);
    real("C", &EpisodeConfig::collision);
    real("r_g", &EpisodeConfig::goal_radius);
    real("d_min", &EpisodeConfig::d_min);
    integer("T_m", &EpisodeConfig::t_m);
    integer("T_e", &EpisodeConfig::t_e);
    integer("T_fit", &EpisodeConfig::t_fit);
    real("r_c", &EpisodeConfig::r_c);
    real("obs_noise", &EpisodeConfig::obs_noise);
    integer("T_CMA", &EpisodeConfig::t_cma);
    integer("N", &EpisodeConfig::population);
    real("zeta", &EpisodeConfig::zeta);
    real("grid_res", &EpisodeConfig::grid_resolution);
    real("prior_mean", &EpisodeConfig::prior_mean);
    real("lengthscale", &EpisodeConfig::lengthscale);
    real("outputscale", &EpisodeConfig::outputscale);
    real("noise", &EpisodeConfig::noise);
    integer("fit_steps", &EpisodeConfig::fit_steps);
    real("fit_lr", &EpisodeConfig::fit_lr);
    real("min_lengthscale", &EpisodeConfig::min_lengthscale);
    real("max_lengthscale", &EpisodeConfig::max_lengthscale);
    real("max_outputscale", &EpisodeConfig::max_outputscale);
    flag("adaptive", &EpisodeConfig::adaptive);
    flag("refinement", &EpisodeConfig::refinement);
    flag("local_min", &EpisodeConfig::local_min);
    flag("vision_pre", &EpisodeConfig::vision_pre);
    flag("vision_post", &EpisodeConfig::vision_post);
    return t;
  }();
  return table;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json state_json(const StateSet& s) {
  json a = json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) a.push_back(vec_json(s.component(i)));
  return a;
}

Vec json_vec(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json event_json(const refine::RefinementEvent& e) {
  return json{{"step", e.step},
              {"active_before", e.active_before},
              {"active_after", e.active_after},
              {"purged", e.purged},
              {"removed", e.removed},
              {"generations", e.generations},
              {"found_feasible", e.found_feasible},
              {"phi", e.phi}};
}

json record_json(const StepRecord& r) {
  json j{{"step", r.step},
         {"state", state_json(r.state)},
         {"action", vec_json(r.action)},
         {"added", r.added},
         {"D", r.memory_size},
         {"D_bar", r.active_size},
         {"local_min_checked", r.local_min_checked},
         {"local_min", r.local_min},
         {"s", r.explore_component},
         {"lengthscale", r.params.lengthscale},
         {"outputscale", r.params.outputscale}};
  j["h_all"] = r.constraints_ok ? json(*r.constraints_ok) : json(nullptr);
  j["refinement"] = r.refinement ? event_json(*r.refinement) : json(nullptr);
  return j;
}

json grid_json(const OccupancyGrid& g) {
  std::string cells;
  cells.reserve(g.cells.size());
  for (auto c : g.cells) cells.push_back(c ? '1' : '0');
  return json{{"origin", vec_json(g.origin)}, {"resolution", g.resolution}, {"shape", g.shape}, {"cells", cells}};
}

OccupancyGrid json_grid(const json& j) {
  OccupancyGrid g;
  g.origin = json_vec(j.at("origin"));
  g.resolution = j.at("resolution").get<double>();
  g.shape = j.at("shape").get<std::vector<int>>();
  for (char c : j.at("cells").get<std::string>()) g.cells.push_back(c == '1' ? 1 : 0);
  return g;
}

json world_json(const envs::WorldGeometry& w) {
  json obstacles = json::array();
  for (const auto& o : w.obstacles)
    obstacles.push_back(json{{"lo", vec_json(o.box.lo)}, {"hi", vec_json(o.box.hi)}, {"observable", o.observable}});
  return json{{"bounds", json{{"lo", vec_json(w.bounds.lo)}, {"hi", vec_json(w.bounds.hi)}}},
              {"obstacles", obstacles}};
}

envs::WorldGeometry json_world(const json& j) {
  envs::WorldGeometry w;
  w.bounds = Box{json_vec(j.at("bounds").at("lo")), json_vec(j.at("bounds").at("hi"))};
  for (const auto& o : j.at("obstacles"))
    w.obstacles.push_back({Box{json_vec(o.at("lo")), json_vec(o.at("hi"))}, o.at("observable").get<bool>()});
  return w;
}

StateSet add_noise(const StateSet& x, double sd, Rng rng) {
  if (sd <= 0.0) return x;
  StateSet out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    for (Eigen::Index k = 0; k < out.dim(); ++k) out.col(i)[k] += sd * rng.normal();
  return out;
}

bool at_goal(const StateSet& x, const GoalSet& goals, double radius) {
  for (const Goal& g : goals)
    if ((x.col(g.component) - g.point).norm() >= radius) return false;
  return true;
}

/// Rng stream ids per consumer, so ablations do not shift unrelated draws.
enum Stream : std::uint64_t { kMppi = 1, kCma = 2, kObservation = 3 };

}  // namespace

EpisodeConfig EpisodeConfig::defaults_for(const std::string& scene) {
  EpisodeConfig c;
  c.scene = scene;
  if (scene.rfind("cable", 0) == 0) {
    c.max_steps = 200;
    c.lambda = 0.01;
    c.samples = 72;
    c.horizon = 8;
    c.sigma = 2.0;
    c.alpha = 0.627;
    c.beta = 0.995;
    c.eta = 100.0;
    c.collision = 10000.0;
    c.goal_radius = 0.04;
    c.d_min = 0.005;
    c.t_m = 3;
    c.t_e = 3;
    c.t_fit = 2;
    c.r_c = 0.01;
    c.t_cma = 25;
    c.population = 50;
    c.zeta = 0.4;
    c.prior_mean = 0.5;
    c.max_lengthscale = 0.06;
    c.max_outputscale = 1.0;
  }
  return c;
}

void EpisodeConfig::set(const std::string& key, const std::string& value) {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(*this, trim(value));
}

std::string EpisodeConfig::get(const std::string& key) const {
  const auto& table = fields();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second.get(*this);
}

std::vector<std::string> EpisodeConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [k, f] : fields()) out.push_back(k);
  return out;
}

void EpisodeConfig::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
  };
  check(max_steps >= 0, "max_steps must be non-negative");
  check(lambda > 0.0, "lambda must be positive");
  check(samples >= 1 && horizon >= 1, "K and T must be at least 1");
  check(sigma > 0.0, "sigma must be positive");
  check(collision >= 0.0 && eta >= 0.0, "C and eta must be non-negative");
  check(goal_radius > 0.0, "r_g must be positive");
  check(t_m >= 1 && t_fit >= 1 && t_e >= 0, "T_m and T_fit must be at least 1, T_e non-negative");
  check(r_c > 0.0, "r_c must be positive");
  check(t_cma >= 1 && population >= 4, "T_CMA must be at least 1 and N at least 4");
  check(zeta > 0.0 && zeta < 1.0, "zeta must lie in (0, 1)");
  check(grid_resolution >= 0.0, "grid_res must be non-negative");
  check(lengthscale > 0.0 && outputscale > 0.0 && noise >= 0.0, "kernel parameters out of range");
  check(min_lengthscale > 0.0 && min_lengthscale <= max_lengthscale, "lengthscale bounds out of order");
  check(max_outputscale > 0.0, "max_outputscale must be positive");
  check(fit_steps >= 0 && fit_lr > 0.0, "fit_steps must be non-negative and fit_lr positive");
  check(obs_noise >= 0.0, "obs_noise must be non-negative");
}

void apply_config(EpisodeConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

EpisodeConfig load_config(const std::string& path, const EpisodeConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  EpisodeConfig cfg = base;
  apply_config(cfg, in);
  return cfg;
}

void ablate(EpisodeConfig& cfg, const std::string& feature) {
  if (feature == "refinement") {
    cfg.refinement = false;
  } else if (feature == "local_min") {
    cfg.local_min = false;
  } else if (feature == "vision_pre") {
    cfg.vision_pre = false;
  } else if (feature == "vision_post") {
    cfg.vision_post = false;
  } else if (feature == "vision") {
    cfg.vision_pre = false;
    cfg.vision_post = false;
  } else if (feature == "adaptive") {
    cfg.adaptive = false;
    cfg.refinement = false;
  } else {
    throw ConfigError("unknown ablation '" + feature + "'");
  }
}

EpisodeReport run_episode(const EpisodeConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  EpisodeReport report;
  report.seed = cfg.seed;
  report.scene = cfg.scene_file.empty() ? cfg.scene : cfg.scene_file;
  try {
    cfg.validate();
    const envs::Scene scene = cfg.scene_file.empty() ? envs::make_scene(cfg.scene) : envs::load_scene(cfg.scene_file);
    report.scene_data = scene;
    std::unique_ptr<envs::Environment> env = envs::make_env(scene);
    const Eigen::Index dim = scene.start.dim();
    const Eigen::Index n = scene.start.size();

    std::vector<Vec> goal_points;
    for (const Goal& g : scene.goals) goal_points.push_back(g.point);

    std::optional<contact::Vision> vision;
    if (scene.camera) vision = contact::Vision{*scene.camera, envs::render_depth(scene.world, *scene.camera)};
    const contact::Vision* pre_vision = vision && cfg.vision_pre ? &*vision : nullptr;
    std::shared_ptr<const FreeSpaceOracle> oracle;
    if (vision && cfg.vision_post) oracle = std::make_shared<contact::VisibilityOracle>(*vision);

    gp::KernelParams params{cfg.lengthscale, cfg.outputscale, cfg.noise};
    const Gpis blank = Gpis(dim, params, oracle).with_prior_mean(cfg.prior_mean).seed_with_goal(goal_points);
    contact::DatasetPair dp = contact::seed_goals({}, goal_points);
    auto build = [&](const gp::KernelParams& p) {
      return blank.with_params(p).with_training(contact::to_training_set(dp.active, dim));
    };
    Gpis surface = build(params);

    constraints::ConstraintSet cset;
    if (scene.family == envs::Family::Peg) {
      const double res = cfg.grid_resolution > 0.0 ? cfg.grid_resolution : cfg.goal_radius / 2.0;
      cset = constraints::ConstraintSet({std::make_shared<constraints::PathExists>(
          scene.world.bounds, res, scene.goals.front().component)});
    } else {
      cset = constraints::ConstraintSet({std::make_shared<constraints::NoPenetration>(cfg.zeta)});
    }

    control::MppiConfig mppi;
    mppi.lambda = cfg.lambda;
    mppi.samples = cfg.samples;
    mppi.horizon = cfg.horizon;
    mppi.sigma = Vec::Constant(env->control_dim(), cfg.sigma * env->max_step() * env->max_step());
    mppi.u_min = env->u_min();
    mppi.u_max = env->u_max();
    mppi.threads = cfg.threads;

    control::CostModel cost;
    cost.goals = scene.goals;
    cost.weights = control::CostWeights{cfg.alpha, cfg.beta, cfg.collision, cfg.eta, cfg.goal_radius};
    cost.weights.validate();

    const Rng root(cfg.seed);
    const Rng mppi_rng = root.split(kMppi);
    const Rng cma_rng = root.split(kCma);
    const Rng obs_rng = root.split(kObservation);

    const envs::Environment& model = *env;
    const control::Dynamics f = [&model](const StateSet& x, const Vec& u) { return model.nominal(x, u); };

    StateSet x = add_noise(env->state(), cfg.obs_noise, obs_rng.split(0));
    report.trajectory.push_back(env->state());
    contact::LocalMinimumDetector detector(x, cfg.t_m, cfg.d_min);
    std::vector<Vec> nominal(static_cast<std::size_t>(cfg.horizon), Vec::Zero(env->control_dim()));
    Eigen::Index s = 0;

    for (int t = 0; t < cfg.max_steps; ++t) {
      StepRecord rec;
      rec.step = t;
      if (cfg.adaptive && n > 1 && cfg.t_e > 0 && t % cfg.t_e == 0) s = control::select_component(surface, x);
      cost.surface = cfg.adaptive ? &surface : nullptr;
      cost.explore_component = s;
      const control::MppiResult plan =
          control::mppi_step(x, nominal, f, cost, mppi, mppi_rng.split(static_cast<std::uint64_t>(t)));
      nominal = plan.nominal;
      rec.action = plan.action;

      const StateSet& truth = env->step_truth(plan.action);
      report.trajectory.push_back(truth);
      const StateSet next = add_noise(truth, cfg.obs_noise, obs_rng.split(static_cast<std::uint64_t>(t) + 1));
      const StateSet predicted = env->nominal(x, plan.action);

      if (cfg.adaptive) {
        const contact::LabelBatch labels = contact::gen_labels({x, plan.action, next, predicted});
        const bool stuck = detector.observe(next);
        rec.local_min_checked = cfg.local_min && detector.checked_last();
        const bool local_min = cfg.local_min && stuck;
        rec.local_min = local_min;
        const contact::LabelBatch batch = contact::pre_process(labels, next, pre_vision, cfg.r_c, local_min);
        contact::UpdateResult upd = contact::update_datasets(std::move(dp), batch, next, predicted, local_min);
        dp = std::move(upd.datasets);
        rec.added = upd.added;
        if (upd.added > 0) surface = build(surface.params());

        if (cfg.refinement) {
          const constraints::Context ctx{next, goal_points};
          const bool ok = cset.evaluate(surface, ctx);
          rec.constraints_ok = ok;
          if (!ok) {
            refine::CmawmOptions opts;
            opts.generations = cfg.t_cma;
            opts.population = cfg.population;
            opts.seed = cma_rng.split(static_cast<std::uint64_t>(t)).key();
            opts.threads = cfg.threads;
            refine::RefineOutcome out = refine::refine_contacts(std::move(dp), cset, surface, ctx, opts);
            out.event.step = t;
            dp = std::move(out.datasets);
            for (auto& p : out.removed_points) report.removed_by_refinement.push_back(std::move(p));
            report.refinements.push_back(out.event);
            rec.refinement = out.event;
            surface = build(surface.params());
          }
        }

        if ((t + 1) % cfg.t_fit == 0 && cfg.fit_steps > 0 && surface.active().size() >= 2) {
          gp::TrainingSet centered = surface.active();
          centered.labels.array() -= cfg.prior_mean;
          gp::KernelParams fitted =
              gp::fit_hyperparams(centered, surface.params(), cfg.fit_steps, cfg.fit_lr, gp::FitMask{true, true, false});
          fitted.lengthscale = std::clamp(fitted.lengthscale, cfg.min_lengthscale, cfg.max_lengthscale);
          fitted.outputscale = std::min(fitted.outputscale, cfg.max_outputscale);
          if (!(fitted == surface.params())) surface = build(fitted);
        }
      }

      x = next;
      rec.state = next;
      rec.memory_size = dp.memory.size();
      rec.active_size = dp.active.size();
      rec.explore_component = s;
      rec.params = surface.params();
      report.log.push_back(std::move(rec));
      report.steps = t + 1;
      if (at_goal(truth, scene.goals, cfg.goal_radius)) {
        report.success = true;
        break;
      }
    }

    report.datasets = dp;
    if (scene.world.bounds.dim() == 2 || scene.world.bounds.dim() == 3) {
      const double res = cfg.grid_resolution > 0.0 ? cfg.grid_resolution : cfg.goal_radius / 2.0;
      report.grid = cfg.adaptive ? surface.occupancy_grid(scene.world.bounds, res)
                                 : OccupancyGrid::covering(scene.world.bounds, res);
    }
  } catch (const std::exception& e) {
    report.success = false;
    report.error = e.what();
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::string check_memory_property(const EpisodeReport& report) {
  for (const contact::DataPoint& p : report.removed_by_refinement) {
    if (!p.removable()) return "a goal seed was removed by refinement";
    if (p.local_min) continue;
    bool found = false;
    for (const contact::DataPoint& m : report.datasets.memory) found = found || (m.point - p.point).norm() <= kDuplicateTolerance;
    if (!found) return "a refined-away point is missing from memory";
  }
  for (const Goal& g : report.scene_data.goals) {
    bool found = false;
    for (const contact::DataPoint& a : report.datasets.active)
      found = found || (a.source == contact::Source::GoalSeed && (a.point - g.point).norm() <= kDuplicateTolerance);
    if (!found && report.error.empty()) return "a goal seed is missing from the active set";
  }
  return {};
}

BatchSummary summarize(const std::vector<EpisodeReport>& reports) {
  BatchSummary s;
  s.episodes = static_cast<int>(reports.size());
  std::vector<double> steps;
  for (const auto& r : reports)
    if (r.success) steps.push_back(static_cast<double>(r.steps));
  s.successes = static_cast<int>(steps.size());
  s.success_rate = s.episodes > 0 ? static_cast<double>(s.successes) / s.episodes : 0.0;
  if (!steps.empty()) {
    double mean = 0.0;
    for (double v : steps) mean += v;
    mean /= static_cast<double>(steps.size());
    double var = 0.0;
    for (double v : steps) var += (v - mean) * (v - mean);
    const double sd = steps.size() > 1 ? std::sqrt(var / static_cast<double>(steps.size() - 1)) : 0.0;
    s.mean_steps = mean;
    s.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(steps.size()));
  }
  return s;
}

std::vector<EpisodeReport> run_batch(const EpisodeConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                     unsigned workers) {
  require(!seeds.empty(), "run_batch: no seeds");
  std::vector<EpisodeReport> reports(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    EpisodeConfig c = cfg;
    c.seed = seeds[i];
    reports[i] = run_episode(c);
  });
  return reports;
}

void write_step_log(std::ostream& out, const EpisodeReport& report) {
  for (const StepRecord& r : report.log) out << record_json(r).dump() << '\n';
}

void write_report_json(std::ostream& out, const EpisodeReport& report) {
  json traj = json::array();
  for (const StateSet& s : report.trajectory) traj.push_back(state_json(s));
  json events = json::array();
  for (const auto& e : report.refinements) events.push_back(event_json(e));
  json goals = json::array();
  for (const Goal& g : report.scene_data.goals) goals.push_back(json{{"component", g.component}, {"point", vec_json(g.point)}});
  const std::string memory = check_memory_property(report);
  json j{{"scene", report.scene},
         {"seed", report.seed},
         {"success", report.success},
         {"steps", report.steps},
         {"error", report.error},
         {"wall_seconds", report.wall_seconds},
         {"D", report.datasets.memory.size()},
         {"D_bar", report.datasets.active.size()},
         {"removed_by_refinement", report.removed_by_refinement.size()},
         {"memory_property", memory.empty() ? json("ok") : json(memory)},
         {"refinements", events},
         {"world", world_json(report.scene_data.world)},
         {"goals", goals},
         {"goal_radius", report.scene_data.goal_radius},
         {"trajectory", traj}};
  if (!report.grid.cells.empty()) j["grid"] = grid_json(report.grid);
  out << j.dump(1) << '\n';
}

void write_summary_json(std::ostream& out, const BatchSummary& s) {
  json j{{"episodes", s.episodes}, {"successes", s.successes}, {"success_rate", s.success_rate}};
  j["mean_steps"] = s.mean_steps ? json(*s.mean_steps) : json(nullptr);
  j["ci_half_width"] = s.ci_half_width ? json(*s.ci_half_width) : json(nullptr);
  out << j.dump(1) << '\n';
}

SvgInput svg_input(const EpisodeReport& report) {
  SvgInput in;
  in.world = report.scene_data.world;
  if (!report.trajectory.empty()) {
    const Eigen::Index n = report.trajectory.front().size();
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<Vec> path;
      for (const StateSet& s : report.trajectory) path.push_back(s.component(i));
      in.trajectories.push_back(std::move(path));
    }
  }
  for (const Goal& g : report.scene_data.goals) in.goals.push_back(g.point);
  in.goal_radius = report.scene_data.goal_radius;
  if (!report.grid.cells.empty()) in.grid = report.grid;
  return in;
}

SvgInput read_svg_input(std::istream& report_json) {
  json j;
  try {
    report_json >> j;
  } catch (const json::exception& e) {
    throw IoError(std::string("report is not valid JSON: ") + e.what());
  }
  SvgInput in;
  try {
    in.world = json_world(j.at("world"));
    const json& traj = j.at("trajectory");
    if (!traj.empty()) {
      const std::size_t n = traj.front().size();
      in.trajectories.resize(n);
      for (const json& state : traj)
        for (std::size_t i = 0; i < n; ++i) in.trajectories[i].push_back(json_vec(state.at(i)));
    }
    for (const json& g : j.at("goals")) in.goals.push_back(json_vec(g.at("point")));
    in.goal_radius = j.at("goal_radius").get<double>();
    if (j.contains("grid")) in.grid = json_grid(j.at("grid"));
  } catch (const json::exception& e) {
    throw IoError(std::string("report is missing fields: ") + e.what());
  }
  return in;
}

void write_svg(std::ostream& out, const SvgInput& in) {
  require(in.world.bounds.dim() == 2, "SVG export is planar");
  const double scale = 800.0 / (in.world.bounds.hi - in.world.bounds.lo).maxCoeff();
  const Vec lo = in.world.bounds.lo;
  const double height = (in.world.bounds.hi[1] - lo[1]) * scale;
  auto px = [&](double x) { return (x - lo[0]) * scale; };
  auto py = [&](double y) { return height - (y - lo[1]) * scale; };
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (in.world.bounds.hi[0] - lo[0]) * scale
      << "\" height=\"" << height << "\">\n";
  out << "<rect class=\"workspace\" x=\"0\" y=\"0\" width=\"" << (in.world.bounds.hi[0] - lo[0]) * scale
      << "\" height=\"" << height << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const auto& o : in.world.obstacles) {
    const double x0 = px(o.box.lo[0]), x1 = px(o.box.hi[0]);
    const double y0 = py(o.box.lo[1]), y1 = py(o.box.hi[1]);
    out << "<path class=\"obstacle\" d=\"M" << x0 << ' ' << y0 << " L" << x1 << ' ' << y0 << " L" << x1 << ' '
        << y1 << " L" << x0 << ' ' << y1 << " Z\" fill=\"" << (o.observable ? "#888" : "#c66")
        << "\" fill-opacity=\"0.6\"/>\n";
  }
  if (in.grid && in.grid->dim() == 2) {
    // Boundary edges between occupied and free cells approximate the 0-level set.
    const OccupancyGrid& g = *in.grid;
    std::ostringstream d;
    d << std::setprecision(6);
    const int nx = g.shape[0], ny = g.shape[1];
    auto occ = [&](int i, int j) {
      if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
      return g.occupied(g.linear_index({i, j}));
    };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        if (!occ(i, j)) continue;
        const double x0 = g.origin[0] + i * g.resolution, x1 = x0 + g.resolution;
        const double y0 = g.origin[1] + j * g.resolution, y1 = y0 + g.resolution;
        if (!occ(i - 1, j)) d << 'M' << px(x0) << ' ' << py(y0) << 'L' << px(x0) << ' ' << py(y1);
        if (!occ(i + 1, j)) d << 'M' << px(x1) << ' ' << py(y0) << 'L' << px(x1) << ' ' << py(y1);
        if (!occ(i, j - 1)) d << 'M' << px(x0) << ' ' << py(y0) << 'L' << px(x1) << ' ' << py(y0);
        if (!occ(i, j + 1)) d << 'M' << px(x0) << ' ' << py(y1) << 'L' << px(x1) << ' ' << py(y1);
      }
    }
    const std::string path = d.str();
    if (!path.empty()) out << "<path class=\"surface\" d=\"" << path << "\" fill=\"none\" stroke=\"#06c\"/>\n";
  }
  for (const Vec& g : in.goals)
    out << "<circle class=\"goal\" cx=\"" << px(g[0]) << "\" cy=\"" << py(g[1]) << "\" r=\""
        << std::max(2.0, in.goal_radius * scale) << "\" fill=\"none\" stroke=\"green\"/>\n";
  for (const auto& path : in.trajectories) {
    out << "<polyline class=\"trajectory\" fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t k = 0; k < path.size(); ++k) out << (k ? " " : "") << px(path[k][0]) << ',' << py(path[k][1]);
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

void export_artifacts(const EpisodeReport& report, const std::string& dir, bool svg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(dir) / name);
    if (!f) throw IoError("cannot write " + (fs::path(dir) / name).string());
    return f;
  };
  {
    auto f = open("steps.jsonl");
    write_step_log(f, report);
  }
  {
    auto f = open("report.json");
    write_report_json(f, report);
  }
  if (!report.grid.cells.empty()) {
    auto f = open("grid.txt");
    write_grid(f, report.grid);
  }
  if (svg && report.scene_data.world.bounds.dim() == 2) {
    auto f = open("episode.svg");
    write_svg(f, svg_input(report));
  }
}

}  // namespace cogis::harness

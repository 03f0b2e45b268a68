#include "cogis/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using cogis::harness::EpisodeConfig;

constexpr int kSuccess = 0;
constexpr int kTaskFailure = 1;
constexpr int kError = 2;

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item = spec.substr(pos, comma - pos);
    const std::size_t dots = item.find("..");
    try {
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dots));
        const auto hi = std::stoull(item.substr(dots + 2));
        if (hi < lo) throw cogis::ConfigError("seed range '" + item + "' is reversed");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw cogis::ConfigError("bad seed list '" + spec + "'");
    }
    pos = comma + 1;
  }
  return seeds;
}

EpisodeConfig build_config(const std::string& scene, const std::string& scene_file,
                           const std::string& config_file, const std::vector<std::string>& sets,
                           const std::vector<std::string>& ablations) {
  EpisodeConfig cfg = EpisodeConfig::defaults_for(scene);
  if (!scene_file.empty()) cfg.scene_file = scene_file;
  if (!config_file.empty()) cfg = cogis::harness::load_config(config_file, cfg);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw cogis::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const std::string& a : ablations) cogis::harness::ablate(cfg, a);
  cfg.validate();
  return cfg;
}

void print_summary(const cogis::harness::EpisodeReport& r) {
  std::cout << r.scene << " seed " << r.seed << ": " << (r.success ? "success" : "failure") << " after "
            << r.steps << " steps, |D| " << r.datasets.memory.size() << ", |D_bar| " << r.datasets.active.size()
            << ", refinements " << r.refinements.size() << ", " << r.wall_seconds << " s";
  if (!r.error.empty()) std::cout << " (error: " << r.error << ")";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-obeying GPIS manipulation experiments"};
  app.require_subcommand(1);

  std::string scene = "peg_u";
  std::string scene_file;
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::string> ablations;
  std::string out;
  std::uint64_t seed = 0;
  std::string seeds = "0..9";
  unsigned workers = 1;
  std::string report_path;
  std::string svg_path;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--scene", scene, "peg_u, peg_i, peg_t or cable_hook");
    cmd->add_option("--scene-file", scene_file, "Scene description file (overrides --scene geometry)");
    cmd->add_option("--config", config_file, "Config file of key = value lines");
    cmd->add_option("--set", sets, "Override one config key (key=value); repeatable");
    cmd->add_option("--ablate", ablations,
                    "Disable a feature: refinement, local_min, vision_pre, vision_post, vision, adaptive");
    cmd->add_option("--out", out, "Output directory");
  };

  CLI::App* run = app.add_subcommand("run", "Run one episode");
  common(run);
  run->add_option("--seed", seed, "Random seed");

  CLI::App* batch = app.add_subcommand("batch", "Run one episode per seed");
  common(batch);
  batch->add_option("--seeds", seeds, "Seeds, e.g. 0..9 or 1,4,7");
  batch->add_option("--workers", workers, "Episodes run concurrently");

  CLI::App* render = app.add_subcommand("render", "Render a report.json as SVG");
  render->add_option("--report", report_path, "report.json written by run or batch")->required();
  render->add_option("--svg", svg_path, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kError;
  }

  try {
    if (*run) {
      EpisodeConfig cfg = build_config(scene, scene_file, config_file, sets, ablations);
      cfg.seed = seed;
      const auto report = cogis::harness::run_episode(cfg);
      if (!out.empty()) cogis::harness::export_artifacts(report, out);
      print_summary(report);
      if (!report.error.empty()) return kError;
      return report.success ? kSuccess : kTaskFailure;
    }
    if (*batch) {
      const EpisodeConfig cfg = build_config(scene, scene_file, config_file, sets, ablations);
      const auto reports = cogis::harness::run_batch(cfg, parse_seeds(seeds), workers);
      bool errors = false;
      for (const auto& r : reports) {
        print_summary(r);
        errors = errors || !r.error.empty();
        if (!out.empty())
          cogis::harness::export_artifacts(r, (std::filesystem::path(out) / ("seed_" + std::to_string(r.seed))).string());
      }
      const auto summary = cogis::harness::summarize(reports);
      cogis::harness::write_summary_json(std::cout, summary);
      if (!out.empty()) {
        std::ofstream f(std::filesystem::path(out) / "summary.json");
        if (!f) throw cogis::IoError("cannot write summary.json in " + out);
        cogis::harness::write_summary_json(f, summary);
      }
      return errors ? kError : kSuccess;
    }
    std::ifstream in(report_path);
    if (!in) throw cogis::IoError("cannot open report " + report_path);
    const auto input = cogis::harness::read_svg_input(in);
    std::ofstream f(svg_path);
    if (!f) throw cogis::IoError("cannot write " + svg_path);
    cogis::harness::write_svg(f, input);
    return kSuccess;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}

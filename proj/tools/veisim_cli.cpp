// Command-line front end: run single episodes, sweep parameter grids, and
// render trajectory logs to SVG.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "veisim/experiment.hpp"
#include "veisim/render.hpp"
#include "veisim/scenario_io.hpp"
#include "veisim/simulation.hpp"

namespace {

// Applying a behavior override also resets the crossing threshold to that
// behavior's default.
veisim::Scenario with_behavior(veisim::Scenario sc, veisim::BehaviorType b) {
  sc.behavior = b;
  sc.escooter_params.crossing_threshold = veisim::default_crossing_threshold(b);
  return sc;
}

int cmd_run(const std::string& scenario_path, const std::string& behavior,
            const std::string& out_dir) {
  veisim::Scenario sc = veisim::load_scenario(scenario_path);
  if (!behavior.empty()) {
    sc = with_behavior(sc, veisim::parse_behavior(behavior));
  }
  const veisim::EpisodeResult ep = veisim::run_episode(sc);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  veisim::write_trajectory_csv(veisim::make_trajectory_log(sc, ep),
                               (fs::path(out_dir) / "trajectory.csv").string());
  nlohmann::json summary;
  summary["use_case"] = sc.name;
  summary["behavior"] = veisim::behavior_name(sc.behavior);
  summary["outcome"] = veisim::outcome_name(ep.outcome);
  summary["t_event_s"] = ep.t_event;
  summary["min_separation_m"] = ep.min_separation;
  if (ep.decision_time >= 0.0) {
    summary["decision_time_s"] = ep.decision_time;
    summary["decision_gap_m"] = ep.decision_gap;
  }
  std::ofstream out(fs::path(out_dir) / "episode.json", std::ios::binary);
  out << summary.dump(2) << "\n";

  std::printf("%s (%s): %s at t=%.1f s, min separation %.2f m\n",
              sc.name.c_str(), veisim::behavior_name(sc.behavior),
              veisim::outcome_name(ep.outcome), ep.t_event, ep.min_separation);
  return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& grid_path,
              const std::string& behavior, const std::string& out_dir,
              int workers) {
  const veisim::Scenario base = veisim::load_scenario(scenario_path);
  const veisim::ParameterGrid grid = veisim::load_grid(grid_path);

  std::vector<veisim::BehaviorType> behaviors;
  if (behavior == "aggressive") {
    behaviors = {veisim::BehaviorType::Aggressive};
  } else if (behavior == "normal") {
    behaviors = {veisim::BehaviorType::Normal};
  } else if (behavior == "both") {
    behaviors = {veisim::BehaviorType::Aggressive, veisim::BehaviorType::Normal};
  } else {
    std::fprintf(stderr, "unknown behavior '%s'\n", behavior.c_str());
    return 2;
  }

  for (veisim::BehaviorType b : behaviors) {
    const veisim::SweepResult r =
        veisim::run_sweep(with_behavior(base, b), grid, workers);
    const std::string stem = std::string("results_") + veisim::behavior_name(b);
    veisim::write_results(r, out_dir, stem);
    std::printf("%s (%s): %zu episodes, %zu collisions, rate %.2f%%\n",
                base.name.c_str(), veisim::behavior_name(b), r.episodes,
                r.collisions, r.collision_rate);
  }
  return 0;
}

int cmd_render(const std::string& log_path, const std::string& times_arg,
               const std::string& out_path) {
  const veisim::TrajectoryLog log = veisim::load_trajectory_csv(log_path);
  std::vector<double> times;
  std::string token;
  for (char c : times_arg + ",") {
    if (c == ',') {
      if (!token.empty()) {
        times.push_back(std::stod(token));
        token.clear();
      }
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token += c;
    }
  }
  if (times.empty()) {
    std::fprintf(stderr, "no times given\n");
    return 2;
  }
  const std::string svg = veisim::render_strip(log, times);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
    return 1;
  }
  out << svg;
  std::printf("wrote %s (%zu frames)\n", out_path.c_str(), times.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vehicle / e-scooter interaction micro-simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string grid_path;
  std::string behavior;
  std::string out_dir = ".";
  std::string log_path;
  std::string times_arg;
  std::string out_path = "strip.svg";
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  CLI::App* run = app.add_subcommand("run", "run one episode and log it");
  run->add_option("--scenario", scenario_path, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--behavior", behavior,
                  "override the scenario behavior (aggressive|normal)");
  run->add_option("--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "expand a grid and run it");
  sweep->add_option("--scenario", scenario_path, "base scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid_path, "parameter grid JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  std::string sweep_behavior = "both";
  sweep->add_option("--behavior", sweep_behavior, "aggressive|normal|both");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--workers", workers, "parallel episode workers");

  CLI::App* render = app.add_subcommand("render", "render a trajectory log");
  render->add_option("--log", log_path, "trajectory CSV from 'run'")
      ->required()
      ->check(CLI::ExistingFile);
  render->add_option("--times", times_arg, "comma-separated times in seconds")
      ->required();
  render->add_option("--out", out_path, "output SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(scenario_path, behavior, out_dir);
    if (sweep->parsed()) {
      return cmd_sweep(scenario_path, grid_path, sweep_behavior, out_dir,
                       workers);
    }
    if (render->parsed()) return cmd_render(log_path, times_arg, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

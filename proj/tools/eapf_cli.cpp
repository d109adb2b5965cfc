// eapf: plan, optimize and track a manipulator motion from a scenario file.
//
//   eapf run --scenario data/gen3_obstacle_scene.yaml --mode eapf --out out/eapf
//   eapf compare --scenario data/gen3_obstacle_scene.yaml --out out/cmp
//   eapf export-trajectory --scenario ... --mode apf --out out/traj --rate 250

#include "eapf/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Energy-based artificial potential field planning pipeline"};
  app.require_subcommand(1);

  std::string scenario;
  std::string mode = "eapf";
  std::string out_dir = "out";
  long seed = 0;  // reserved for randomized scenes; the pipeline is deterministic
  double rate = 1000.0;

  auto common = [&](CLI::App* cmd, bool with_mode) {
    cmd->add_option("--scenario", scenario, "Scenario YAML file")->required();
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed (currently unused)")->capture_default_str();
    if (with_mode) {
      cmd->add_option("--mode", mode, "Field mode")
          ->check(CLI::IsMember({"apf", "eapf"}))
          ->capture_default_str();
    }
  };

  CLI::App* run = app.add_subcommand("run", "Run one mode end to end");
  common(run, true);
  CLI::App* compare = app.add_subcommand("compare", "Run both modes and write comparison.csv");
  common(compare, false);
  CLI::App* export_traj =
      app.add_subcommand("export-trajectory", "Plan and optimize, then write trajectory.csv");
  common(export_traj, true);
  export_traj->add_option("--rate", rate, "Sample rate [Hz]")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : eapf::kExitConfigError;
  }

  try {
    if (*run) {
      return eapf::cmdRun(scenario, eapf::parseMode(mode), out_dir, std::cerr);
    }
    if (*compare) {
      return eapf::cmdCompare(scenario, out_dir, std::cerr);
    }
    return eapf::cmdExportTrajectory(scenario, eapf::parseMode(mode), out_dir, rate, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return eapf::kExitPlannerFailure;
  }
}

/**
 * @file commands.hpp
 * @brief The `run`, `compare` and `export-trajectory` commands, usable
 *        without the command-line front end.
 */
#ifndef EAPF_COMMANDS_HPP_
#define EAPF_COMMANDS_HPP_

#include "eapf/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eapf {

enum ExitCode : int {
  kExitOk = 0,
  kExitPlannerFailure = 1,
  kExitCollision = 2,
  kExitConfigError = 3,
};

/// Higher is worse: config error > collision > planner failure > ok.
int worstExit(int a, int b);

struct RunOutcome {
  FieldMode mode = FieldMode::Eapf;
  int exit_code = kExitOk;
  std::string message;         ///< empty on success
  bool planner_converged = false;
  std::optional<Metrics> metrics;  ///< absent when no trajectory could be built
  double t_f = 0.0;
};

/// Runs the whole pipeline for one mode and writes waypoints.csv,
/// trajectory.csv, simlog.csv and metrics.txt into out_dir.
RunOutcome runScenario(const ScenarioConfig& config, FieldMode mode,
                       const std::filesystem::path& out_dir);

/// mode,exit_code,converged,arrival_time,min_clearance,... one row per outcome.
void writeComparisonCsv(std::ostream& os, const std::vector<RunOutcome>& outcomes);

int cmdRun(const std::filesystem::path& scenario, FieldMode mode,
           const std::filesystem::path& out_dir, std::ostream& log);

/// Both modes, concurrently, into out_dir/apf and out_dir/eapf, plus
/// out_dir/comparison.csv.
int cmdCompare(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
               std::ostream& log);

/// Plans and optimizes only; writes trajectory.csv sampled at rate_hz.
int cmdExportTrajectory(const std::filesystem::path& scenario, FieldMode mode,
                        const std::filesystem::path& out_dir, double rate_hz, std::ostream& log);

FieldMode parseMode(const std::string& text);

}  // namespace eapf

#endif  // EAPF_COMMANDS_HPP_

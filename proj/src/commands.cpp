#include "eapf/commands.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace eapf {

namespace fs = std::filesystem;

namespace {

std::string formatNumber(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::ofstream openOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

double pathClearance(const RobotModel& model, const Scene& scene, const std::vector<VecX>& path) {
  double best = std::numeric_limits<double>::infinity();
  for (const VecX& q : path) {
    best = std::min(best, minClearance(scene, controlPoints(forwardKinematics(model, q))).distance);
  }
  return best;
}

std::optional<ScenarioConfig> loadScenario(const fs::path& path, std::ostream& log) {
  try {
    return parseScenario(path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    log << "error: " << path.string() << ": " << e.what() << '\n';
  }
  return std::nullopt;
}

void report(std::ostream& log, const RunOutcome& r) {
  log << toString(r.mode) << ": ";
  if (r.exit_code == kExitOk) {
    log << "arrived at t = " << formatNumber(*r.metrics->arrival_time)
        << " s, min clearance " << formatNumber(r.metrics->min_clearance) << " m\n";
  } else {
    log << r.message << '\n';
  }
}

}  // namespace

int worstExit(int a, int b) {
  auto rank = [](int c) {
    switch (c) {
      case kExitOk: return 0;
      case kExitPlannerFailure: return 1;
      case kExitCollision: return 2;
      default: return 3;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

FieldMode parseMode(const std::string& text) {
  if (text == "apf") {
    return FieldMode::Apf;
  }
  if (text == "eapf") {
    return FieldMode::Eapf;
  }
  throw std::invalid_argument("mode must be 'apf' or 'eapf', got '" + text + "'");
}

RunOutcome runScenario(const ScenarioConfig& config, FieldMode mode, const fs::path& out_dir) {
  RunOutcome out;
  out.mode = mode;
  fs::create_directories(out_dir);
  const PipelineSpec spec = config.pipeline(mode);

  auto fail = [&](int code, const std::string& msg) {
    out.exit_code = worstExit(out.exit_code, code);
    if (!out.message.empty()) {
      out.message += "; ";
    }
    out.message += msg;
  };

  Waypoints waypoints;
  try {
    waypoints = planPath(spec.model, spec.scene, spec.q_start, spec.q_goal, spec.field, mode);
  } catch (const std::runtime_error& e) {
    fail(kExitPlannerFailure, std::string("planner failed: ") + e.what());
    return out;
  }
  {
    std::ofstream f = openOutput(out_dir / "waypoints.csv");
    writeWaypointsCsv(f, waypoints);
  }
  out.planner_converged = waypoints.converged;
  if (!waypoints.converged) {
    fail(kExitPlannerFailure, "planner did not reach goal_tol within t_max_plan = " +
                                  formatNumber(spec.field.t_max_plan) + " s");
  }
  const double planned_clearance = pathClearance(spec.model, spec.scene, waypoints.path);
  if (planned_clearance <= 0.0) {
    fail(kExitCollision, "planned path collides (clearance " + formatNumber(planned_clearance) +
                             " m)");
  }

  OptimizedTrajectory opt;
  try {
    opt = optimizeTrajectory(waypoints, spec.limits, spec.lambda, spec.knot_count);
  } catch (const TrajectoryError& e) {
    fail(kExitPlannerFailure, std::string("trajectory optimization failed: ") + e.what());
    return out;
  }
  out.t_f = opt.t_f;
  {
    std::ofstream f = openOutput(out_dir / "trajectory.csv");
    writeTrajectoryCsv(f, opt.trajectory, 1.0 / spec.sim.dt);
  }

  SimLog log;
  try {
    log = simulateTracking(spec.model, spec.scene, opt.trajectory, spec.q_goal, spec.gains,
                           spec.sim, spec.controller);
  } catch (const SimulationError& e) {
    fail(kExitPlannerFailure, std::string("simulation failed: ") + e.what());
    return out;
  }
  {
    std::ofstream f = openOutput(out_dir / "simlog.csv");
    writeSimLogCsv(f, log);
  }

  const Metrics m = computeMetrics(log, spec.scene, spec.model, spec.q_goal, spec.sim.arrival_tol);
  out.metrics = m;
  {
    std::ofstream f = openOutput(out_dir / "metrics.txt");
    f << "mode=" << toString(mode) << '\n';
    writeMetrics(f, m);
    f << "planner_converged=" << (waypoints.converged ? "true" : "false") << '\n';
    f << "t_f=" << formatNumber(opt.t_f) << '\n';
    f << "t_min=" << formatNumber(opt.t_min) << '\n';
  }
  if (m.min_clearance <= 0.0 && planned_clearance > 0.0) {
    fail(kExitCollision, "executed motion collides (clearance " + formatNumber(m.min_clearance) +
                             " m)");
  }
  if (!m.converged) {
    fail(kExitPlannerFailure, "did not arrive within " + formatNumber(spec.sim.arrival_tol) +
                                  " rad of the goal");
  }
  return out;
}

void writeComparisonCsv(std::ostream& os, const std::vector<RunOutcome>& outcomes) {
  os << "mode,exit_code,converged,arrival_time,min_clearance,executed_jerk_integral,"
        "max_joint_speed,max_joint_accel,t_f\n";
  for (const RunOutcome& r : outcomes) {
    os << toString(r.mode) << ',' << r.exit_code << ',';
    if (!r.metrics) {
      os << "false,none,nan,nan,nan,nan,nan\n";
      continue;
    }
    const Metrics& m = *r.metrics;
    os << (r.exit_code == kExitOk ? "true" : "false") << ','
       << (m.arrival_time ? formatNumber(*m.arrival_time) : "none") << ','
       << formatNumber(m.min_clearance) << ',' << formatNumber(m.executed_jerk_integral) << ','
       << formatNumber(m.max_joint_speed) << ',' << formatNumber(m.max_joint_accel) << ','
       << formatNumber(r.t_f) << '\n';
  }
}

int cmdRun(const fs::path& scenario, FieldMode mode, const fs::path& out_dir, std::ostream& log) {
  const std::optional<ScenarioConfig> config = loadScenario(scenario, log);
  if (!config) {
    return kExitConfigError;
  }
  const RunOutcome r = runScenario(*config, mode, out_dir);
  report(log, r);
  return r.exit_code;
}

int cmdCompare(const fs::path& scenario, const fs::path& out_dir, std::ostream& log) {
  const std::optional<ScenarioConfig> config = loadScenario(scenario, log);
  if (!config) {
    return kExitConfigError;
  }
  auto launch = [&](FieldMode mode) {
    return std::async(std::launch::async, [&config, &out_dir, mode] {
      return runScenario(*config, mode, out_dir / toString(mode));
    });
  };
  auto apf = launch(FieldMode::Apf);
  auto eapf = launch(FieldMode::Eapf);
  const std::vector<RunOutcome> outcomes{apf.get(), eapf.get()};

  std::ofstream f = openOutput(out_dir / "comparison.csv");
  writeComparisonCsv(f, outcomes);
  int code = kExitOk;
  for (const RunOutcome& r : outcomes) {
    report(log, r);
    code = worstExit(code, r.exit_code);
  }
  return code;
}

int cmdExportTrajectory(const fs::path& scenario, FieldMode mode, const fs::path& out_dir,
                        double rate_hz, std::ostream& log) {
  if (!(rate_hz > 0.0)) {
    log << "error: --rate must be > 0\n";
    return kExitConfigError;
  }
  const std::optional<ScenarioConfig> config = loadScenario(scenario, log);
  if (!config) {
    return kExitConfigError;
  }
  const PipelineSpec spec = config->pipeline(mode);
  try {
    const Waypoints wp =
        planPath(spec.model, spec.scene, spec.q_start, spec.q_goal, spec.field, mode);
    const OptimizedTrajectory opt =
        optimizeTrajectory(wp, spec.limits, spec.lambda, spec.knot_count);
    fs::create_directories(out_dir);
    std::ofstream f = openOutput(out_dir / "trajectory.csv");
    writeTrajectoryCsv(f, opt.trajectory, rate_hz);
    log << toString(mode) << ": T_f = " << formatNumber(opt.t_f) << " s"
        << (wp.converged ? "" : " (planner did not converge)") << '\n';
    return wp.converged ? kExitOk : kExitPlannerFailure;
  } catch (const std::runtime_error& e) {
    log << toString(mode) << ": " << e.what() << '\n';
    return kExitPlannerFailure;
  }
}

}  // namespace eapf

/**
 * @file simulator.hpp
 * @brief Closed-loop pipeline: plan -> optimize -> computed-torque tracking.
 *
 * Physics and control share one fixed step; the torque computed at the start
 * of a step is held over the RK4 step.
 */
#ifndef EAPF_SIMULATOR_HPP_
#define EAPF_SIMULATOR_HPP_

#include "eapf/controller.hpp"
#include "eapf/potential_field.hpp"
#include "eapf/trajectory.hpp"

#include <iosfwd>
#include <optional>

namespace eapf {

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  double dt = 1e-3;
  double t_extra = 0.5;      ///< simulated time past T_f [s]
  double arrival_tol = 0.05; ///< [rad]
};

struct SimRow {
  double t = 0.0;
  VecX q;
  VecX qdot;
  VecX tau;
  Vec3 ee_pos = Vec3::Zero();
  Vec3 ee_vel = Vec3::Zero();
  double dist_goal = 0.0;  ///< end-effector distance to its goal position [m]
  double vel_goal = 0.0;   ///< end-effector speed relative to the (static) goal [m/s]
  double dist_obs = 0.0;   ///< minimum signed control-point clearance [m], +inf if no obstacles
  double vel_obs = 0.0;    ///< speed of the control point closest to an obstacle [m/s]
};

struct SimLog {
  std::vector<SimRow> rows;
};

struct Metrics {
  std::optional<double> arrival_time;
  double min_clearance = 0.0;
  double executed_jerk_integral = 0.0;
  double max_joint_speed = 0.0;
  double max_joint_accel = 0.0;
  bool converged = false;
};

/// One classical RK4 step of the forward dynamics with tau held constant.
JointState step(const RobotModel& model, const JointState& state, const VecX& tau, double dt);

struct PipelineSpec {
  RobotModel model;
  Scene scene;
  VecX q_start;
  VecX q_goal;
  FieldParams field;
  FieldMode mode = FieldMode::Eapf;
  Limits limits;
  double lambda = 100.0;
  int knot_count = 10;
  Gains gains;
  SimConfig sim;
  ControllerOptions controller;
};

struct PipelineResult {
  Waypoints waypoints;
  OptimizedTrajectory optimized;
  SimLog log;
};

/// Tracks a trajectory from its first knot with computed torque until T_f + t_extra.
SimLog simulateTracking(const RobotModel& model, const Scene& scene, const Trajectory& traj,
                        const VecX& q_goal, const Gains& gains, const SimConfig& sim,
                        const ControllerOptions& controller = {});

PipelineResult runPipeline(const PipelineSpec& spec);

Metrics computeMetrics(const SimLog& log, const Scene& scene, const RobotModel& model,
                       const VecX& q_goal, double arrival_tol);

/// Header: t,q1..qn,qd1..qdn,tau1..taun,ee_x,ee_y,ee_z,dist_goal,vel_goal,dist_obs,vel_obs
void writeSimLogCsv(std::ostream& os, const SimLog& log);
void writeWaypointsCsv(std::ostream& os, const Waypoints& waypoints);
/// key=value lines.
void writeMetrics(std::ostream& os, const Metrics& metrics);

}  // namespace eapf

#endif  // EAPF_SIMULATOR_HPP_

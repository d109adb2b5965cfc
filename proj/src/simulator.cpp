#include "eapf/simulator.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace eapf {

namespace {

std::string formatNumber(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

void checkFinite(const JointState& s, double t) {
  if (!s.q.allFinite() || !s.qdot.allFinite()) {
    std::ostringstream msg;
    msg << "simulation state became non-finite at t = " << t;
    throw SimulationError(msg.str());
  }
}

SimRow makeRow(const RobotModel& model, const Scene& scene, double t, const JointState& s,
               const VecX& tau, const Vec3& ee_goal) {
  SimRow row;
  row.t = t;
  row.q = s.q;
  row.qdot = s.qdot;
  row.tau = tau;

  const std::vector<Transform> frames = forwardKinematics(model, s.q);
  const std::size_t ee = frames.size();
  row.ee_pos = frames.back().translation;
  row.ee_vel = pointJacobian(frames, ee, Vec3::Zero()).jv * s.qdot;
  row.dist_goal = (row.ee_pos - ee_goal).norm();
  row.vel_goal = row.ee_vel.norm();

  const Clearance c = minClearance(scene, controlPoints(frames));
  row.dist_obs = c.distance;
  if (c.frame_index > 0) {
    row.vel_obs = (pointJacobian(frames, c.frame_index, Vec3::Zero()).jv * s.qdot).norm();
  }
  return row;
}

}  // namespace

JointState step(const RobotModel& model, const JointState& state, const VecX& tau, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be > 0");
  }
  auto accel = [&](const VecX& q, const VecX& qd) { return forwardDynamics(model, {q, qd}, tau); };

  const VecX& q = state.q;
  const VecX& v = state.qdot;
  const VecX k1q = v;
  const VecX k1v = accel(q, v);
  const VecX k2q = v + 0.5 * dt * k1v;
  const VecX k2v = accel(q + 0.5 * dt * k1q, k2q);
  const VecX k3q = v + 0.5 * dt * k2v;
  const VecX k3v = accel(q + 0.5 * dt * k2q, k3q);
  const VecX k4q = v + dt * k3v;
  const VecX k4v = accel(q + dt * k3q, k4q);

  JointState next;
  next.q = q + dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  next.qdot = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return next;
}

SimLog simulateTracking(const RobotModel& model, const Scene& scene, const Trajectory& traj,
                        const VecX& q_goal, const Gains& gains, const SimConfig& sim,
                        const ControllerOptions& controller) {
  if (!(sim.dt > 0.0)) {
    throw std::invalid_argument("sim dt must be > 0");
  }
  const Vec3 ee_goal = forwardKinematics(model, q_goal).back().translation;
  const double t_end = traj.duration() + sim.t_extra;
  const auto steps = static_cast<long>(std::ceil(t_end / sim.dt - 1e-9));

  SimLog log;
  log.rows.reserve(static_cast<std::size_t>(steps + 1));
  JointState state{traj.knot_positions.front(), VecX::Zero(q_goal.size())};
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    const VecX tau = computedTorque(model, state, evaluate(traj, t), gains, controller);
    log.rows.push_back(makeRow(model, scene, t, state, tau, ee_goal));
    if (k < steps) {
      state = step(model, state, tau, sim.dt);
      checkFinite(state, t + sim.dt);
    }
  }
  return log;
}

PipelineResult runPipeline(const PipelineSpec& spec) {
  validate(spec.model);
  validate(spec.gains, spec.model.dof());
  PipelineResult out;
  out.waypoints = planPath(spec.model, spec.scene, spec.q_start, spec.q_goal, spec.field, spec.mode);
  out.optimized = optimizeTrajectory(out.waypoints, spec.limits, spec.lambda, spec.knot_count);
  out.log = simulateTracking(spec.model, spec.scene, out.optimized.trajectory, spec.q_goal,
                             spec.gains, spec.sim, spec.controller);
  return out;
}

Metrics computeMetrics(const SimLog& log, const Scene& scene, const RobotModel& model,
                       const VecX& q_goal, double arrival_tol) {
  if (log.rows.empty()) {
    throw std::invalid_argument("cannot compute metrics of an empty log");
  }
  Metrics m;
  const auto& rows = log.rows;

  // Arrival: first time after which the goal ball is never left again.
  std::size_t first_inside = rows.size();
  for (std::size_t k = rows.size(); k-- > 0;) {
    if ((rows[k].q - q_goal).norm() > arrival_tol) {
      break;
    }
    first_inside = k;
  }
  if (first_inside < rows.size()) {
    m.arrival_time = rows[first_inside].t;
    m.converged = true;
  }

  m.min_clearance = std::numeric_limits<double>::infinity();
  for (const SimRow& r : rows) {
    const Clearance c = minClearance(scene, controlPoints(forwardKinematics(model, r.q)));
    m.min_clearance = std::min(m.min_clearance, c.distance);
    m.max_joint_speed = std::max(m.max_joint_speed, r.qdot.cwiseAbs().maxCoeff());
  }

  // Accelerations at step midpoints, jerk between consecutive midpoints.
  std::vector<VecX> acc;
  std::vector<double> acc_t;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double h = rows[k + 1].t - rows[k].t;
    acc.push_back((rows[k + 1].qdot - rows[k].qdot) / h);
    acc_t.push_back(0.5 * (rows[k + 1].t + rows[k].t));
    m.max_joint_accel = std::max(m.max_joint_accel, acc.back().cwiseAbs().maxCoeff());
  }
  std::vector<double> jerk_sq;
  std::vector<double> jerk_t;
  for (std::size_t k = 0; k + 1 < acc.size(); ++k) {
    const double h = acc_t[k + 1] - acc_t[k];
    jerk_sq.push_back(((acc[k + 1] - acc[k]) / h).squaredNorm());
    jerk_t.push_back(0.5 * (acc_t[k + 1] + acc_t[k]));
  }
  for (std::size_t k = 0; k + 1 < jerk_sq.size(); ++k) {
    m.executed_jerk_integral += 0.5 * (jerk_sq[k] + jerk_sq[k + 1]) * (jerk_t[k + 1] - jerk_t[k]);
  }
  return m;
}

void writeSimLogCsv(std::ostream& os, const SimLog& log) {
  const std::size_t n = log.rows.empty() ? 0 : static_cast<std::size_t>(log.rows.front().q.size());
  os << 't';
  for (const char* prefix : {"q", "qd", "tau"}) {
    for (std::size_t j = 1; j <= n; ++j) {
      os << ',' << prefix << j;
    }
  }
  os << ",ee_x,ee_y,ee_z,dist_goal,vel_goal,dist_obs,vel_obs\n";
  for (const SimRow& r : log.rows) {
    os << formatNumber(r.t);
    for (const VecX* v : {&r.q, &r.qdot, &r.tau}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) {
        os << ',' << formatNumber((*v)(j));
      }
    }
    for (int i = 0; i < 3; ++i) {
      os << ',' << formatNumber(r.ee_pos(i));
    }
    os << ',' << formatNumber(r.dist_goal) << ',' << formatNumber(r.vel_goal) << ','
       << formatNumber(r.dist_obs) << ',' << formatNumber(r.vel_obs) << '\n';
  }
}

void writeWaypointsCsv(std::ostream& os, const Waypoints& waypoints) {
  const std::size_t n =
      waypoints.path.empty() ? 0 : static_cast<std::size_t>(waypoints.path.front().size());
  os << 't';
  for (std::size_t j = 1; j <= n; ++j) {
    os << ",q" << j;
  }
  os << '\n';
  for (std::size_t k = 0; k < waypoints.path.size(); ++k) {
    os << formatNumber(waypoints.times[k]);
    for (Eigen::Index j = 0; j < waypoints.path[k].size(); ++j) {
      os << ',' << formatNumber(waypoints.path[k](j));
    }
    os << '\n';
  }
}

void writeMetrics(std::ostream& os, const Metrics& m) {
  os << "converged=" << (m.converged ? "true" : "false") << '\n';
  os << "arrival_time=" << (m.arrival_time ? formatNumber(*m.arrival_time) : "none") << '\n';
  os << "min_clearance=" << formatNumber(m.min_clearance) << '\n';
  os << "executed_jerk_integral=" << formatNumber(m.executed_jerk_integral) << '\n';
  os << "max_joint_speed=" << formatNumber(m.max_joint_speed) << '\n';
  os << "max_joint_accel=" << formatNumber(m.max_joint_accel) << '\n';
}

}  // namespace eapf

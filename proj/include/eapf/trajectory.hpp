/**
 * @file trajectory.hpp
 * @brief Piecewise-quintic minimum-jerk trajectories and the jerk + time optimizer.
 *
 * All joints share one set of knot times, placed proportionally to the
 * joint-space arc length between knots. For a fixed duration the interior
 * knot velocities and accelerations minimize the summed squared-jerk
 * integral; the outer search trades that against lambda * T_f subject to
 * |qdot| <= vel_max and |qddot| <= acc_max.
 */
#ifndef EAPF_TRAJECTORY_HPP_
#define EAPF_TRAJECTORY_HPP_

#include "eapf/kinematics.hpp"
#include "eapf/potential_field.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace eapf {

struct Limits {
  double vel_max = 10.0;  ///< rad/s
  double acc_max = 50.0;  ///< rad/s^2
};

class TrajectoryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// q(t) = sum_k c[k] (t - t0)^k on one segment.
using Quintic = std::array<double, 6>;

struct Trajectory {
  std::vector<double> knot_times;     ///< strictly increasing, starts at 0
  std::vector<VecX> knot_positions;
  std::vector<std::vector<Quintic>> segments;  ///< [joint][segment]

  double duration() const { return knot_times.back(); }
  std::size_t dof() const { return segments.size(); }
};

struct DesiredState {
  VecX q;
  VecX qdot;
  VecX qddot;
};

struct ConstraintReport {
  double max_vel = 0.0;
  double max_acc = 0.0;
  bool feasible = true;
};

struct OptimizedTrajectory {
  Trajectory trajectory;
  double t_f = 0.0;
  double t_min = 0.0;  ///< shortest feasible duration found by bisection
};

inline constexpr double kTimeSearchLower = 1e-3;
inline constexpr double kTimeSearchUpper = 60.0;
inline constexpr double kDefaultTMax = 10.0;

/// Resamples a path at `count` points equally spaced in joint-space arc length.
std::vector<VecX> selectKnots(const std::vector<VecX>& path, int count);

/// Minimum-jerk quintic spline through the knots with rest boundary conditions.
Trajectory fitMinJerk(const std::vector<VecX>& knots, double t_f);

/// Exact integral of ||dddot q||^2 over the trajectory.
double jerkCost(const Trajectory& traj);

/// Max |qdot| and |qddot| from 1 kHz sampling plus segment endpoints and critical points.
ConstraintReport constraintReport(const Trajectory& traj, const Limits& limits);

DesiredState evaluate(const Trajectory& traj, double t);

/// Bisection for the shortest feasible duration, then golden-section search of
/// jerkCost + lambda * T over [T_min, max(T_min, t_max)].
OptimizedTrajectory optimizeTrajectory(const std::vector<VecX>& knots, const Limits& limits,
                                       double lambda, double t_max = kDefaultTMax);

OptimizedTrajectory optimizeTrajectory(const Waypoints& waypoints, const Limits& limits,
                                       double lambda, int knot_count,
                                       double t_max = kDefaultTMax);

/// CSV columns t, q_d1..q_dn, qdot_d1..qdot_dn, qddot_d1..qddot_dn sampled at rate_hz.
void writeTrajectoryCsv(std::ostream& os, const Trajectory& traj, double rate_hz);

}  // namespace eapf

#endif  // EAPF_TRAJECTORY_HPP_

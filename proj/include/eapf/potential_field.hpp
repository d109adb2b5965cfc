/**
 * @file potential_field.hpp
 * @brief Classical and energy-based artificial potential fields.
 *
 * Attraction acts in joint space on r_e = q - q_goal. Repulsion acts in
 * Cartesian space at the control points (origins of frames 1..n and the
 * end-effector) and is mapped to joint space through J_v^T.
 */
#ifndef EAPF_POTENTIAL_FIELD_HPP_
#define EAPF_POTENTIAL_FIELD_HPP_

#include "eapf/kinematics.hpp"

#include <variant>
#include <vector>

namespace eapf {

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Finite solid cylinder spanning base_center .. base_center + height * axis.
struct Cylinder {
  Vec3 base_center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double height = 0.0;
  double radius = 0.0;
};

using Obstacle = std::variant<Sphere, Cylinder>;

struct Scene {
  std::vector<Obstacle> obstacles;
};

void validate(const Obstacle& obstacle);

enum class FieldMode { Apf, Eapf };

const char* toString(FieldMode mode);

struct FieldParams {
  double k_a = 5.0;
  double k_r = 10.0;
  double rho0 = 0.4;       ///< spatial influence bound [m]
  double gamma = 0.8;      ///< velocity scaling factor, (0, 1)
  double mu_base = 1.0;    ///< base velocity influence bound [m/s]
  double eps_v = 1e-3;     ///< floor on relative speed [m/s]
  double eps_r = 1e-3;     ///< floor on surface distance [m]
  double damping = 0.5;    ///< virtual viscous damping [1/s]
  double dt_plan = 1e-3;   ///< [s]
  double t_max_plan = 10.0;  ///< [s]
  double goal_tol = 0.05;  ///< joint-space convergence radius [rad]
};

/// Throws std::invalid_argument naming the violated field.
void validate(const FieldParams& params);

struct SurfaceDistance {
  double distance;  ///< >= eps_r
  Vec3 dir;         ///< unit, from the closest surface point towards p
};

/// Clamped distance to the obstacle surface. Inside the body the distance is
/// eps_r and dir points radially away from the centre (sphere) or axis
/// (cylinder); at the exact centre/axis dir is +x.
SurfaceDistance surfaceDistance(const Obstacle& obstacle, const Vec3& p, double eps_r);

/// Unclamped signed distance (negative inside); used for collision checks.
double signedSurfaceDistance(const Obstacle& obstacle, const Vec3& p);

/// Repulsion from one obstacle at one control point.
struct ObstacleTerm {
  std::size_t frame_index = 0;  ///< control point, 1..n+1
  std::size_t obstacle_index = 0;
  double r_o = 0.0;    ///< clamped surface distance [m]
  Vec3 dir_o = Vec3::UnitX();
  double v_o = 0.0;    ///< closing speed, clamped to >= eps_v [m/s]
  double a_o = 0.0;    ///< d(v_o)/dt [m/s^2]
  bool approaching = false;
  MatX jv;             ///< 3 x n translational Jacobian of the control point
};

struct FieldSample {
  VecX r_e;  ///< q - q_goal
  VecX v_e;  ///< velocity of the goal relative to the robot (= -qdot)
  VecX a_e;  ///< d(v_e)/dt
  std::vector<ObstacleTerm> terms;  ///< only pairs with r_o < rho0
};

/// k_r (1/r_o - 1/rho0) / r_o^2 for r_o < rho0, else 0.
double repulsivePositionMagnitude(double r_o, const FieldParams& params);

/// gamma k_r (3/v_o - 2/mu_o) a_o / v_o^3 (ungated).
double repulsiveKineticMagnitude(double v_o, double a_o, double mu_o, const FieldParams& params);

/// Classical APF: -k_a r_e + sum J^T (position repulsion * dir).
VecX apfForce(const VecX& r_e, const std::vector<ObstacleTerm>& terms, const FieldParams& params);

/// gamma k_a a_e - k_a r_e.
VecX eapfAttractive(const VecX& r_e, const VecX& a_e, const FieldParams& params);

/// Cartesian E-APF repulsion. Position term iff r_o < rho0; kinetic term iff
/// additionally v_o < mu_o and the control point is approaching.
Vec3 eapfRepulsive(double r_o, const Vec3& dir_o, double v_o, double a_o, double mu_o,
                   bool approaching, const FieldParams& params);

/// mu_base * clamp(r_o / rho0, 0.1, 1).
double muSchedule(double r_o, const FieldParams& params);

/// Total E-APF generalized force for a sample; Jacobians are taken from the sample terms.
VecX eapfForce(const FieldSample& sample, const FieldParams& params);

/// Builds the sample at (q, qdot): geometry, closing speeds and Jacobians.
/// Acceleration estimates (a_e, a_o) are left at zero.
FieldSample sampleField(const RobotModel& model, const Scene& scene, const VecX& q,
                        const VecX& qdot, const VecX& q_goal, const FieldParams& params);

/// Joint-space E-APF force at (q, qdot) with zero acceleration estimates.
VecX eapfForce(const RobotModel& model, const Scene& scene, const VecX& q, const VecX& qdot,
               const VecX& q_goal, const FieldParams& params);

/// Control points in base coordinates: origins of frames 1..n, then the end-effector.
std::vector<Vec3> controlPoints(const std::vector<Transform>& frames);

/// Minimum signed clearance over control points and obstacles (+inf for an empty scene).
struct Clearance {
  double distance;
  std::size_t frame_index;  ///< control point attaining the minimum (0 if none)
};
Clearance minClearance(const Scene& scene, const std::vector<Vec3>& points);

struct PlannerStep {
  double t;
  VecX q;
  VecX qdot;
  VecX force;  ///< generalized field force (before damping)
};

struct Waypoints {
  std::vector<VecX> path;
  std::vector<double> times;
  bool converged = false;
  std::vector<PlannerStep> planner_log;
};

/// Integrates unit-inertia virtual dynamics qddot = F - damping * qdot with
/// semi-implicit Euler until ||q - q_goal|| <= goal_tol or t > t_max_plan.
/// On capture one final waypoint sitting exactly on q_goal is appended.
///
/// In E-APF mode the kinetic terms depend on the current accelerations
/// (a_e = -qddot, a_o = -dir^T J qddot). Each step solves for the acceleration
/// consistent with the force law, which adds gamma k_a to the joint-space
/// inertia and kappa (J^T dir)(J^T dir)^T per active kinetic term.
Waypoints planPath(const RobotModel& model, const Scene& scene, const VecX& q_start,
                   const VecX& q_goal, const FieldParams& params, FieldMode mode);

}  // namespace eapf

#endif  // EAPF_POTENTIAL_FIELD_HPP_

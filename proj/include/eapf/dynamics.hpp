/**
 * @file dynamics.hpp
 * @brief Euler-Lagrange rigid-body dynamics: M(q), C(q, qdot), G(q), energy.
 *
 *   M(q) qddot + C(q, qdot) qdot + G(q) = tau
 *
 * Potential energy is V = -sum_i m_i g^T p_ci with g the gravity vector of the
 * model (pointing down), so that G = dV/dq = sum_i J_vi^T (-m_i g).
 */
#ifndef EAPF_DYNAMICS_HPP_
#define EAPF_DYNAMICS_HPP_

#include "eapf/kinematics.hpp"

namespace eapf {

struct JointState {
  VecX q;
  VecX qdot;
};

struct DynamicsTerms {
  MatX m;
  MatX c;
  VecX g;
};

/// Central-difference step used for dM/dq in the Coriolis construction.
inline constexpr double kCoriolisFdStep = 1e-6;

MatX massMatrix(const RobotModel& model, const VecX& q);

/// Christoffel-symbol Coriolis matrix; Mdot - 2C is skew-symmetric.
MatX coriolisMatrix(const RobotModel& model, const VecX& q, const VecX& qdot);

VecX gravityVector(const RobotModel& model, const VecX& q);

DynamicsTerms dynamicsTerms(const RobotModel& model, const JointState& state);

/// Solves M qddot = tau - C qdot - G by Cholesky; throws ModelError if M is not SPD.
VecX forwardDynamics(const RobotModel& model, const JointState& state, const VecX& tau);

double kineticEnergy(const RobotModel& model, const JointState& state);
double potentialEnergy(const RobotModel& model, const VecX& q);

/// Kinetic plus gravitational potential energy.
double totalEnergy(const RobotModel& model, const JointState& state);

}  // namespace eapf

#endif  // EAPF_DYNAMICS_HPP_

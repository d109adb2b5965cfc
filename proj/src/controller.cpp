#include "eapf/controller.hpp"

namespace eapf {

Gains Gains::broadcast(std::size_t dof, double kp, double kd) {
  const auto n = static_cast<Eigen::Index>(dof);
  return {VecX::Constant(n, kp), VecX::Constant(n, kd)};
}

void validate(const Gains& gains, std::size_t dof) {
  if (static_cast<std::size_t>(gains.kp.size()) != dof ||
      static_cast<std::size_t>(gains.kd.size()) != dof) {
    throw ModelError("gain vectors must have one entry per joint");
  }
  if (!(gains.kp.minCoeff() > 0.0) || !(gains.kd.minCoeff() > 0.0)) {
    throw ModelError("controller gains must be > 0");
  }
}

VecX computedTorque(const RobotModel& model, const JointState& state, const DesiredState& desired,
                    const Gains& gains, const ControllerOptions& options) {
  checkDimension(model, state.q, "q");
  checkDimension(model, state.qdot, "qdot");
  checkDimension(model, desired.q, "q_d");
  checkDimension(model, desired.qdot, "qdot_d");
  checkDimension(model, desired.qddot, "qddot_d");
  validate(gains, model.dof());

  const VecX e = desired.q - state.q;
  const VecX edot = desired.qdot - state.qdot;
  const VecX v = desired.qddot + gains.kp.cwiseProduct(e) + gains.kd.cwiseProduct(edot);

  const DynamicsTerms d = dynamicsTerms(model, state);
  VecX tau = d.m * v + d.c * state.qdot + d.g;
  if (options.torque_limit) {
    tau = tau.cwiseMax(-*options.torque_limit).cwiseMin(*options.torque_limit);
  }
  return tau;
}

}  // namespace eapf

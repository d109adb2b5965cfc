#ifndef EAPF_CONTROLLER_HPP_
#define EAPF_CONTROLLER_HPP_

#include "eapf/dynamics.hpp"
#include "eapf/trajectory.hpp"

#include <optional>

namespace eapf {

/// PD gains of the computed-torque law, one entry per joint.
struct Gains {
  VecX kp;  ///< s^-2
  VecX kd;  ///< s^-1

  /// Same gains on every joint.
  static Gains broadcast(std::size_t dof, double kp, double kd);
};

void validate(const Gains& gains, std::size_t dof);

struct ControllerOptions {
  /// Symmetric per-joint torque clamp [N m]; off when empty.
  std::optional<double> torque_limit;
};

/// tau = M(q) [qdd_d + kp o (q_d - q) + kd o (qd_d - qd)] + C(q, qd) qd + G(q)
VecX computedTorque(const RobotModel& model, const JointState& state, const DesiredState& desired,
                    const Gains& gains, const ControllerOptions& options = {});

}  // namespace eapf

#endif  // EAPF_CONTROLLER_HPP_

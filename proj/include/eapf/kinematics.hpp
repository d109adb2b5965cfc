/**
 * @file kinematics.hpp
 * @brief Modified-DH frame chain, forward kinematics and point Jacobians.
 *
 * Link transform (Craig convention):
 *   T_{i-1}^{i} = Rot_x(alpha_{i-1}) * Trans_x(a_{i-1}) * Rot_z(theta_i) * Trans_z(d_i)
 */
#ifndef EAPF_KINEMATICS_HPP_
#define EAPF_KINEMATICS_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eapf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Raised for dimension mismatches, out-of-range indices and model data errors.
class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Rigid-body pose; rotation is kept orthonormal by construction.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }

  Transform operator*(const Transform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Eigen::Matrix4d matrix() const;

  /// ||R^T R - I||_F and |det R - 1| both within tol.
  bool isOrthonormal(double tol = 1e-9) const;
};

struct LinkParams {
  double alpha_prev = 0.0;  ///< link twist [rad]
  double a_prev = 0.0;      ///< link length [m]
  double d = 0.0;           ///< link offset [m]
  double theta_offset = 0.0;
  double mass = 0.0;        ///< [kg]
  Vec3 com = Vec3::Zero();  ///< centre of mass in the link frame [m]
  Mat3 inertia = Mat3::Zero();  ///< about the COM, link frame [kg m^2]
};

struct RobotModel {
  std::vector<LinkParams> links;
  Vec3 gravity{0.0, 0.0, -9.81};
  Transform ee_offset;

  std::size_t dof() const { return links.size(); }
};

/// Throws ModelError naming the first violated invariant (mass, inertia, ee_offset).
void validate(const LinkParams& link, std::size_t index);
void validate(const RobotModel& model);

struct Jacobian {
  MatX jv;  ///< 3 x n, linear
  MatX jw;  ///< 3 x n, angular
};

Transform dhTransform(double alpha_prev, double a_prev, double theta, double d);

/// Base-to-frame transforms for frames 1..n followed by the end-effector (n + 1 entries).
std::vector<Transform> forwardKinematics(const RobotModel& model, const VecX& q);

/// Jacobian of a point fixed in frame `frame_index` (1-based, n + 1 = end-effector).
Jacobian pointJacobian(const RobotModel& model, const VecX& q, std::size_t frame_index,
                       const Vec3& point_local);

/// Same as pointJacobian but reuses frames already produced by forwardKinematics.
Jacobian pointJacobian(const std::vector<Transform>& frames, std::size_t frame_index,
                       const Vec3& point_local);

void checkDimension(const RobotModel& model, const VecX& v, const char* what);

}  // namespace eapf

#endif  // EAPF_KINEMATICS_HPP_

#include "eapf/kinematics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace eapf {

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = rotation;
  T.block<3, 1>(0, 3) = translation;
  return T;
}

bool Transform::isOrthonormal(double tol) const {
  const double orth = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  return orth <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

void validate(const LinkParams& link, std::size_t index) {
  std::ostringstream where;
  where << "link " << index + 1 << ": ";
  if (!(link.mass > 0.0)) {
    throw ModelError(where.str() + "mass must be > 0");
  }
  const Mat3& I = link.inertia;
  if ((I - I.transpose()).norm() > 1e-12 * std::max(1.0, I.norm())) {
    throw ModelError(where.str() + "inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(I);
  const Vec3 p = eig.eigenvalues();
  if (!(p.minCoeff() > 0.0)) {
    throw ModelError(where.str() + "inertia must be positive definite");
  }
  // Principal moments of a physical body satisfy the triangle inequality.
  const double slack = 1e-12 * p.maxCoeff();
  if (p(0) + p(1) < p(2) - slack || p(0) + p(2) < p(1) - slack || p(1) + p(2) < p(0) - slack) {
    throw ModelError(where.str() + "principal moments violate the triangle inequality");
  }
  if (!link.com.allFinite()) {
    throw ModelError(where.str() + "com must be finite");
  }
}

void validate(const RobotModel& model) {
  if (model.links.empty()) {
    throw ModelError("robot model has no links");
  }
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    validate(model.links[i], i);
  }
  if (!model.ee_offset.isOrthonormal()) {
    throw ModelError("ee_offset rotation is not orthonormal");
  }
  if (!model.gravity.allFinite()) {
    throw ModelError("gravity must be finite");
  }
}

void checkDimension(const RobotModel& model, const VecX& v, const char* what) {
  if (static_cast<std::size_t>(v.size()) != model.dof()) {
    std::ostringstream msg;
    msg << what << " has " << v.size() << " entries, model has " << model.dof() << " joints";
    throw ModelError(msg.str());
  }
}

Transform dhTransform(double alpha_prev, double a_prev, double theta, double d) {
  const double ca = std::cos(alpha_prev);
  const double sa = std::sin(alpha_prev);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  // Rot_x(alpha) * Trans_x(a) * Rot_z(theta) * Trans_z(d)
  Transform T;
  T.rotation << ct, -st, 0.0,
                st * ca, ct * ca, -sa,
                st * sa, ct * sa, ca;
  T.translation << a_prev, -sa * d, ca * d;
  return T;
}

std::vector<Transform> forwardKinematics(const RobotModel& model, const VecX& q) {
  checkDimension(model, q, "q");
  std::vector<Transform> frames;
  frames.reserve(model.dof() + 1);
  Transform acc;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const LinkParams& l = model.links[i];
    acc = acc * dhTransform(l.alpha_prev, l.a_prev, q(static_cast<Eigen::Index>(i)) + l.theta_offset, l.d);
    frames.push_back(acc);
  }
  frames.push_back(acc * model.ee_offset);
  return frames;
}

Jacobian pointJacobian(const std::vector<Transform>& frames, std::size_t frame_index,
                       const Vec3& point_local) {
  const std::size_t n = frames.size() - 1;
  if (frame_index < 1 || frame_index > n + 1) {
    std::ostringstream msg;
    msg << "frame_index " << frame_index << " outside [1, " << n + 1 << "]";
    throw ModelError(msg.str());
  }
  const Vec3 p = frames[frame_index - 1].apply(point_local);
  const std::size_t moving = std::min(frame_index, n);

  Jacobian J{MatX::Zero(3, static_cast<Eigen::Index>(n)), MatX::Zero(3, static_cast<Eigen::Index>(n))};
  for (std::size_t k = 0; k < moving; ++k) {
    const Vec3 z = frames[k].rotation.col(2);
    const Vec3& o = frames[k].translation;
    const auto col = static_cast<Eigen::Index>(k);
    J.jv.col(col) = z.cross(p - o);
    J.jw.col(col) = z;
  }
  return J;
}

Jacobian pointJacobian(const RobotModel& model, const VecX& q, std::size_t frame_index,
                       const Vec3& point_local) {
  if (frame_index < 1 || frame_index > model.dof() + 1) {
    std::ostringstream msg;
    msg << "frame_index " << frame_index << " outside [1, " << model.dof() + 1 << "]";
    throw ModelError(msg.str());
  }
  return pointJacobian(forwardKinematics(model, q), frame_index, point_local);
}

}  // namespace eapf

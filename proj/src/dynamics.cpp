#include "eapf/dynamics.hpp"

namespace eapf {

namespace {

MatX massMatrixFromFrames(const RobotModel& model, const std::vector<Transform>& frames) {
  const auto n = static_cast<Eigen::Index>(model.dof());
  MatX M = MatX::Zero(n, n);
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const LinkParams& link = model.links[i];
    const Jacobian J = pointJacobian(frames, i + 1, link.com);
    const Mat3& R = frames[i].rotation;
    const Mat3 I_base = R * link.inertia * R.transpose();
    M.noalias() += link.mass * J.jv.transpose() * J.jv;
    M.noalias() += J.jw.transpose() * I_base * J.jw;
  }
  // Symmetrize away rounding so that M == M^T holds exactly.
  return 0.5 * (M + M.transpose());
}

}  // namespace

MatX massMatrix(const RobotModel& model, const VecX& q) {
  return massMatrixFromFrames(model, forwardKinematics(model, q));
}

MatX coriolisMatrix(const RobotModel& model, const VecX& q, const VecX& qdot) {
  checkDimension(model, q, "q");
  checkDimension(model, qdot, "qdot");
  const auto n = static_cast<Eigen::Index>(model.dof());

  // dM[k] = dM/dq_k by central differences.
  std::vector<MatX> dM(static_cast<std::size_t>(n));
  VecX qp = q;
  for (Eigen::Index k = 0; k < n; ++k) {
    qp(k) = q(k) + kCoriolisFdStep;
    const MatX Mp = massMatrix(model, qp);
    qp(k) = q(k) - kCoriolisFdStep;
    const MatX Mm = massMatrix(model, qp);
    qp(k) = q(k);
    dM[static_cast<std::size_t>(k)] = (Mp - Mm) / (2.0 * kCoriolisFdStep);
  }

  // C_ij = sum_k 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qdot_k
  MatX C = MatX::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double cij = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto& dMk = dM[static_cast<std::size_t>(k)];
        const auto& dMj = dM[static_cast<std::size_t>(j)];
        const auto& dMi = dM[static_cast<std::size_t>(i)];
        cij += 0.5 * (dMk(i, j) + dMj(i, k) - dMi(j, k)) * qdot(k);
      }
      C(i, j) = cij;
    }
  }
  return C;
}

VecX gravityVector(const RobotModel& model, const VecX& q) {
  const std::vector<Transform> frames = forwardKinematics(model, q);
  VecX G = VecX::Zero(static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const LinkParams& link = model.links[i];
    const Jacobian J = pointJacobian(frames, i + 1, link.com);
    G.noalias() += J.jv.transpose() * (-link.mass * model.gravity);
  }
  return G;
}

DynamicsTerms dynamicsTerms(const RobotModel& model, const JointState& state) {
  return {massMatrix(model, state.q), coriolisMatrix(model, state.q, state.qdot),
          gravityVector(model, state.q)};
}

VecX forwardDynamics(const RobotModel& model, const JointState& state, const VecX& tau) {
  checkDimension(model, tau, "tau");
  const DynamicsTerms d = dynamicsTerms(model, state);
  Eigen::LLT<MatX> llt(d.m);
  if (llt.info() != Eigen::Success) {
    throw ModelError("mass matrix is not positive definite; check the robot inertial data");
  }
  return llt.solve(tau - d.c * state.qdot - d.g);
}

double kineticEnergy(const RobotModel& model, const JointState& state) {
  checkDimension(model, state.qdot, "qdot");
  return 0.5 * state.qdot.dot(massMatrix(model, state.q) * state.qdot);
}

double potentialEnergy(const RobotModel& model, const VecX& q) {
  const std::vector<Transform> frames = forwardKinematics(model, q);
  double V = 0.0;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const LinkParams& link = model.links[i];
    V -= link.mass * model.gravity.dot(frames[i].apply(link.com));
  }
  return V;
}

double totalEnergy(const RobotModel& model, const JointState& state) {
  return kineticEnergy(model, state) + potentialEnergy(model, state.q);
}

}  // namespace eapf

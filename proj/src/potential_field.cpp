#include "eapf/potential_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eapf {

namespace {

struct RawDistance {
  double signed_distance;
  Vec3 dir;
};

RawDistance sphereDistance(const Sphere& s, const Vec3& p) {
  const Vec3 w = p - s.center;
  const double len = w.norm();
  const Vec3 dir = len > 0.0 ? Vec3(w / len) : Vec3::UnitX();
  return {len - s.radius, dir};
}

RawDistance cylinderDistance(const Cylinder& c, const Vec3& p) {
  const Vec3 rel = p - c.base_center;
  const double s = rel.dot(c.axis);
  const Vec3 radial = rel - s * c.axis;
  const double rho = radial.norm();
  const Vec3 radial_dir = rho > 0.0 ? Vec3(radial / rho) : Vec3::UnitX();

  if (s >= 0.0 && s <= c.height && rho <= c.radius) {
    const double depth = std::min({c.radius - rho, s, c.height - s});
    return {-depth, radial_dir};
  }
  const double s_clamped = std::clamp(s, 0.0, c.height);
  const Vec3 closest = c.base_center + s_clamped * c.axis +
                       (rho > c.radius ? Vec3(c.radius * radial_dir) : radial);
  const Vec3 diff = p - closest;
  const double len = diff.norm();
  return {len, len > 0.0 ? Vec3(diff / len) : radial_dir};
}

RawDistance rawDistance(const Obstacle& obstacle, const Vec3& p) {
  return std::visit(
      [&p](const auto& shape) -> RawDistance {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return sphereDistance(shape, p);
        } else {
          return cylinderDistance(shape, p);
        }
      },
      obstacle);
}

void requirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " must be > 0, got " << value;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace

const char* toString(FieldMode mode) { return mode == FieldMode::Apf ? "apf" : "eapf"; }

void validate(const Obstacle& obstacle) {
  std::visit(
      [](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        requirePositive(shape.radius, "radius");
        if constexpr (std::is_same_v<T, Cylinder>) {
          requirePositive(shape.height, "height");
          if (std::abs(shape.axis.norm() - 1.0) > 1e-9) {
            throw std::invalid_argument("axis must be a unit vector");
          }
        }
      },
      obstacle);
}

void validate(const FieldParams& p) {
  requirePositive(p.k_a, "k_a");
  requirePositive(p.k_r, "k_r");
  requirePositive(p.rho0, "rho0");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) {
    std::ostringstream msg;
    msg << "gamma must lie in (0, 1), got " << p.gamma;
    throw std::invalid_argument(msg.str());
  }
  requirePositive(p.mu_base, "mu_base");
  requirePositive(p.eps_v, "eps_v");
  requirePositive(p.eps_r, "eps_r");
  if (!(p.damping >= 0.0)) {
    throw std::invalid_argument("damping must be >= 0");
  }
  requirePositive(p.dt_plan, "dt_plan");
  requirePositive(p.t_max_plan, "t_max_plan");
  requirePositive(p.goal_tol, "goal_tol");
}

SurfaceDistance surfaceDistance(const Obstacle& obstacle, const Vec3& p, double eps_r) {
  const RawDistance raw = rawDistance(obstacle, p);
  return {std::max(raw.signed_distance, eps_r), raw.dir};
}

double signedSurfaceDistance(const Obstacle& obstacle, const Vec3& p) {
  return rawDistance(obstacle, p).signed_distance;
}

double repulsivePositionMagnitude(double r_o, const FieldParams& params) {
  if (r_o >= params.rho0) {
    return 0.0;
  }
  const double inv = 1.0 / r_o;
  return params.k_r * (inv - 1.0 / params.rho0) * inv * inv;
}

double repulsiveKineticMagnitude(double v_o, double a_o, double mu_o, const FieldParams& params) {
  return params.gamma * params.k_r * (3.0 / v_o - 2.0 / mu_o) * a_o / (v_o * v_o * v_o);
}

double muSchedule(double r_o, const FieldParams& params) {
  return params.mu_base * std::clamp(r_o / params.rho0, 0.1, 1.0);
}

VecX apfForce(const VecX& r_e, const std::vector<ObstacleTerm>& terms, const FieldParams& params) {
  VecX F = -params.k_a * r_e;
  for (const ObstacleTerm& t : terms) {
    const double mag = repulsivePositionMagnitude(t.r_o, params);
    if (mag != 0.0) {
      F.noalias() += t.jv.transpose() * (mag * t.dir_o);
    }
  }
  return F;
}

VecX eapfAttractive(const VecX& r_e, const VecX& a_e, const FieldParams& params) {
  return params.gamma * params.k_a * a_e - params.k_a * r_e;
}

Vec3 eapfRepulsive(double r_o, const Vec3& dir_o, double v_o, double a_o, double mu_o,
                   bool approaching, const FieldParams& params) {
  if (r_o >= params.rho0) {
    return Vec3::Zero();
  }
  double mag = repulsivePositionMagnitude(r_o, params);
  if (approaching && v_o < mu_o) {
    mag += repulsiveKineticMagnitude(v_o, a_o, mu_o, params);
  }
  return mag * dir_o;
}

VecX eapfForce(const FieldSample& sample, const FieldParams& params) {
  VecX F = eapfAttractive(sample.r_e, sample.a_e, params);
  for (const ObstacleTerm& t : sample.terms) {
    const Vec3 f = eapfRepulsive(t.r_o, t.dir_o, t.v_o, t.a_o, muSchedule(t.r_o, params),
                                 t.approaching, params);
    F.noalias() += t.jv.transpose() * f;
  }
  return F;
}

std::vector<Vec3> controlPoints(const std::vector<Transform>& frames) {
  std::vector<Vec3> points;
  points.reserve(frames.size());
  for (const Transform& T : frames) {
    points.push_back(T.translation);
  }
  return points;
}

Clearance minClearance(const Scene& scene, const std::vector<Vec3>& points) {
  Clearance best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t c = 0; c < points.size(); ++c) {
    for (const Obstacle& o : scene.obstacles) {
      const double d = signedSurfaceDistance(o, points[c]);
      if (d < best.distance) {
        best = {d, c + 1};
      }
    }
  }
  return best;
}

FieldSample sampleField(const RobotModel& model, const Scene& scene, const VecX& q,
                        const VecX& qdot, const VecX& q_goal, const FieldParams& params) {
  checkDimension(model, q, "q");
  checkDimension(model, qdot, "qdot");
  checkDimension(model, q_goal, "q_goal");
  const auto n = static_cast<Eigen::Index>(model.dof());

  FieldSample sample;
  sample.r_e = q - q_goal;
  sample.v_e = -qdot;
  sample.a_e = VecX::Zero(n);

  const std::vector<Transform> frames = forwardKinematics(model, q);
  for (std::size_t c = 1; c <= frames.size(); ++c) {
    const Vec3 p = frames[c - 1].translation;
    MatX jv;  // computed lazily, only when some obstacle is in range
    for (std::size_t o = 0; o < scene.obstacles.size(); ++o) {
      const SurfaceDistance sd = surfaceDistance(scene.obstacles[o], p, params.eps_r);
      if (sd.distance >= params.rho0) {
        continue;
      }
      if (jv.size() == 0) {
        jv = pointJacobian(frames, c, Vec3::Zero()).jv;
      }
      ObstacleTerm term;
      term.frame_index = c;
      term.obstacle_index = o;
      term.r_o = sd.distance;
      term.dir_o = sd.dir;
      const double closing = -sd.dir.dot(jv * qdot);
      term.approaching = closing > 0.0;
      term.v_o = std::max(closing, params.eps_v);
      term.a_o = 0.0;
      term.jv = jv;
      sample.terms.push_back(std::move(term));
    }
  }
  return sample;
}

VecX eapfForce(const RobotModel& model, const Scene& scene, const VecX& q, const VecX& qdot,
               const VecX& q_goal, const FieldParams& params) {
  return eapfForce(sampleField(model, scene, q, qdot, q_goal, params), params);
}

namespace {

bool kineticActive(const ObstacleTerm& t, const FieldParams& params) {
  return t.r_o < params.rho0 && t.approaching && t.v_o < muSchedule(t.r_o, params);
}

/// Acceleration consistent with the force law at the current state, and the
/// sample with its acceleration estimates filled in.
VecX solveAcceleration(FieldSample& sample, const VecX& qdot, const FieldParams& params,
                       FieldMode mode) {
  const auto n = sample.r_e.size();
  if (mode == FieldMode::Apf) {
    return apfForce(sample.r_e, sample.terms, params) - params.damping * qdot;
  }

  // (1 + gamma k_a) qddot + sum kappa g g^T qddot = -k_a r_e + sum g F_pos - damping qdot
  MatX A = (1.0 + params.gamma * params.k_a) * MatX::Identity(n, n);
  VecX rhs = -params.k_a * sample.r_e - params.damping * qdot;
  for (const ObstacleTerm& t : sample.terms) {
    const VecX g = t.jv.transpose() * t.dir_o;
    rhs.noalias() += repulsivePositionMagnitude(t.r_o, params) * g;
    if (kineticActive(t, params)) {
      // kinetic magnitude is linear in a_o: kappa * a_o
      const double kappa = repulsiveKineticMagnitude(t.v_o, 1.0, muSchedule(t.r_o, params), params);
      A.noalias() += kappa * g * g.transpose();
    }
  }
  Eigen::LDLT<MatX> ldlt(A);
  VecX qddot = ldlt.solve(rhs);

  sample.a_e = -qddot;
  for (ObstacleTerm& t : sample.terms) {
    t.a_o = -t.dir_o.dot(t.jv * qddot);
  }
  return qddot;
}

}  // namespace

Waypoints planPath(const RobotModel& model, const Scene& scene, const VecX& q_start,
                   const VecX& q_goal, const FieldParams& params, FieldMode mode) {
  validate(params);
  checkDimension(model, q_start, "q_start");
  checkDimension(model, q_goal, "q_goal");

  Waypoints out;
  VecX q = q_start;
  VecX qdot = VecX::Zero(q.size());
  long step = 0;
  double t = 0.0;

  out.path.push_back(q);
  out.times.push_back(t);
  if ((q - q_goal).norm() <= params.goal_tol) {
    out.converged = true;
    out.planner_log.push_back({t, q, qdot, VecX::Zero(q.size())});
    return out;
  }

  while (true) {
    FieldSample sample = sampleField(model, scene, q, qdot, q_goal, params);
    const VecX qddot = solveAcceleration(sample, qdot, params, mode);
    const VecX force = qddot + params.damping * qdot;
    if (!qddot.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite field force at t = " << t << "; check field parameters";
      throw std::runtime_error(msg.str());
    }
    out.planner_log.push_back({t, q, qdot, force});

    qdot += params.dt_plan * qddot;
    q += params.dt_plan * qdot;
    ++step;
    t = static_cast<double>(step) * params.dt_plan;

    out.path.push_back(q);
    out.times.push_back(t);
    if ((q - q_goal).norm() <= params.goal_tol) {
      // Captured: finish exactly on the goal so downstream stages end there.
      out.converged = true;
      out.planner_log.push_back({t, q, qdot, VecX::Zero(q.size())});
      q = q_goal;
      qdot.setZero();
      t = static_cast<double>(step + 1) * params.dt_plan;
      out.path.push_back(q);
      out.times.push_back(t);
      break;
    }
    if (t > params.t_max_plan) {
      break;
    }
  }
  out.planner_log.push_back({t, q, qdot, VecX::Zero(q.size())});
  return out;
}

}  // namespace eapf

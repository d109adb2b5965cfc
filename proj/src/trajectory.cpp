#include "eapf/trajectory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace eapf {

namespace {

constexpr double kSampleRate = 1000.0;
constexpr double kBisectionTol = 1e-3;
constexpr double kGoldenTol = 1e-7;

struct Boundary {
  double p, v, a;
};

Quintic hermiteQuintic(const Boundary& b0, const Boundary& b1, double h) {
  const double h2 = h * h;
  const double h3 = h2 * h;
  const double dp = b1.p - b0.p;
  Quintic c{};
  c[0] = b0.p;
  c[1] = b0.v;
  c[2] = 0.5 * b0.a;
  c[3] = (20.0 * dp - (8.0 * b1.v + 12.0 * b0.v) * h - (3.0 * b0.a - b1.a) * h2) / (2.0 * h3);
  c[4] = (-30.0 * dp + (14.0 * b1.v + 16.0 * b0.v) * h + (3.0 * b0.a - 2.0 * b1.a) * h2) /
         (2.0 * h3 * h);
  c[5] = (12.0 * dp - 6.0 * (b1.v + b0.v) * h - (b0.a - b1.a) * h2) / (2.0 * h3 * h2);
  return c;
}

/// Integral over [0, h] of the squared jerk of one quintic.
double segmentJerk(const Quintic& c, double h) {
  const double A = 6.0 * c[3];
  const double B = 24.0 * c[4];
  const double C = 60.0 * c[5];
  const double h2 = h * h;
  const double h3 = h2 * h;
  return A * A * h + A * B * h2 + (B * B + 2.0 * A * C) * h3 / 3.0 + B * C * h2 * h2 / 2.0 +
         C * C * h3 * h2 / 5.0;
}

/// 6x6 Hessian of segmentJerk with respect to (p0, v0, a0, p1, v1, a1).
Eigen::Matrix<double, 6, 6> segmentHessian(double h) {
  // Columns of L map each boundary unit vector to quintic coefficients.
  Eigen::Matrix<double, 6, 6> L;
  for (int k = 0; k < 6; ++k) {
    double x[6] = {0, 0, 0, 0, 0, 0};
    x[k] = 1.0;
    const Quintic c = hermiteQuintic({x[0], x[1], x[2]}, {x[3], x[4], x[5]}, h);
    for (int r = 0; r < 6; ++r) {
      L(r, k) = c[static_cast<std::size_t>(r)];
    }
  }
  Eigen::Matrix<double, 3, 6> D = Eigen::Matrix<double, 3, 6>::Zero();
  D(0, 3) = 6.0;
  D(1, 4) = 24.0;
  D(2, 5) = 60.0;
  Eigen::Matrix3d G;
  const double h2 = h * h;
  G << h, h2 / 2.0, h2 * h / 3.0,
       h2 / 2.0, h2 * h / 3.0, h2 * h2 / 4.0,
       h2 * h / 3.0, h2 * h2 / 4.0, h2 * h2 * h / 5.0;
  const Eigen::Matrix<double, 3, 6> DL = D * L;
  return DL.transpose() * G * DL;
}

double polyEval(const double* c, int degree, double t) {
  double acc = c[degree];
  for (int k = degree - 1; k >= 0; --k) {
    acc = acc * t + c[k];
  }
  return acc;
}

/// Derivative coefficients of a quintic: order 1..3.
std::array<double, 5> velocityCoeffs(const Quintic& c) {
  return {c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4], 5.0 * c[5]};
}
std::array<double, 4> accelCoeffs(const Quintic& c) {
  return {2.0 * c[2], 6.0 * c[3], 12.0 * c[4], 20.0 * c[5]};
}
std::array<double, 3> jerkCoeffs(const Quintic& c) {
  return {6.0 * c[3], 24.0 * c[4], 60.0 * c[5]};
}

/// Real roots in [lo, hi] of sum_k c[k] t^k (ascending coefficients).
template <std::size_t N>
std::vector<double> realRootsIn(const std::array<double, N>& coeffs, double lo, double hi) {
  int degree = static_cast<int>(N) - 1;
  double scale = 0.0;
  for (double v : coeffs) {
    scale = std::max(scale, std::abs(v));
  }
  if (scale == 0.0) {
    return {};
  }
  while (degree > 0 && std::abs(coeffs[static_cast<std::size_t>(degree)]) <= 1e-14 * scale) {
    --degree;
  }
  std::vector<double> roots;
  if (degree == 0) {
    return roots;
  }
  if (degree == 1) {
    roots.push_back(-coeffs[0] / coeffs[1]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    const double lead = coeffs[static_cast<std::size_t>(degree)];
    for (int i = 0; i < degree; ++i) {
      companion(0, i) = -coeffs[static_cast<std::size_t>(degree - 1 - i)] / lead;
    }
    for (int i = 1; i < degree; ++i) {
      companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (int i = 0; i < degree; ++i) {
      const std::complex<double> z = es.eigenvalues()(i);
      if (std::abs(z.imag()) <= 1e-9 * std::max(1.0, std::abs(z.real()))) {
        roots.push_back(z.real());
      }
    }
  }
  std::vector<double> inside;
  for (double r : roots) {
    if (r >= lo && r <= hi) {
      inside.push_back(r);
    }
  }
  return inside;
}

std::size_t segmentIndex(const Trajectory& traj, double t) {
  const auto it = std::upper_bound(traj.knot_times.begin(), traj.knot_times.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(traj.knot_times.begin(), it));
  return std::min(std::max<std::size_t>(idx, 1), traj.knot_times.size() - 1) - 1;
}

}  // namespace

std::vector<VecX> selectKnots(const std::vector<VecX>& path, int count) {
  if (count < 2) {
    throw std::invalid_argument("knot count must be >= 2");
  }
  if (path.empty()) {
    throw std::invalid_argument("cannot select knots from an empty path");
  }
  if (static_cast<std::size_t>(count) >= path.size()) {
    return path;
  }
  std::vector<double> s(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) {
    s[i] = s[i - 1] + (path[i] - path[i - 1]).norm();
  }
  const double total = s.back();
  if (total == 0.0) {
    return {path.front(), path.back()};
  }

  std::vector<VecX> knots;
  knots.reserve(static_cast<std::size_t>(count));
  knots.push_back(path.front());
  std::size_t seg = 1;
  for (int j = 1; j < count - 1; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(count - 1);
    while (seg < path.size() - 1 && s[seg] < target) {
      ++seg;
    }
    const double len = s[seg] - s[seg - 1];
    const double w = len > 0.0 ? (target - s[seg - 1]) / len : 0.0;
    knots.push_back(path[seg - 1] + w * (path[seg] - path[seg - 1]));
  }
  knots.push_back(path.back());
  return knots;
}

Trajectory fitMinJerk(const std::vector<VecX>& knots, double t_f) {
  if (knots.size() < 2) {
    throw std::invalid_argument("fitMinJerk needs at least two knots");
  }
  if (!(t_f > 0.0)) {
    throw std::invalid_argument("trajectory duration must be > 0");
  }
  const std::size_t m = knots.size() - 1;  // segments
  const auto n = knots.front().size();

  std::vector<double> arc(knots.size(), 0.0);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    arc[i] = arc[i - 1] + (knots[i] - knots[i - 1]).norm();
  }
  Trajectory traj;
  traj.knot_positions = knots;
  traj.knot_times.resize(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    traj.knot_times[i] = arc.back() > 0.0
                             ? t_f * arc[i] / arc.back()
                             : t_f * static_cast<double>(i) / static_cast<double>(m);
  }
  traj.knot_times.back() = t_f;
  for (std::size_t i = 1; i < traj.knot_times.size(); ++i) {
    if (!(traj.knot_times[i] > traj.knot_times[i - 1])) {
      throw TrajectoryError("duplicate knot times: consecutive knots coincide");
    }
  }

  // Free variables: (v_k, a_k) at interior knots k = 1..m-1.
  const auto nfree = static_cast<Eigen::Index>(2 * (m - 1));
  std::vector<Eigen::Matrix<double, 6, 6>> H(m);
  for (std::size_t s = 0; s < m; ++s) {
    H[s] = segmentHessian(traj.knot_times[s + 1] - traj.knot_times[s]);
  }

  // Variable slot for local entry r of segment s (-1 if fixed).
  auto slot = [m](std::size_t s, int r) -> Eigen::Index {
    if (r == 0 || r == 3) {
      return -1;
    }
    const std::size_t knot = r < 3 ? s : s + 1;
    if (knot == 0 || knot == m) {
      return -1;
    }
    return static_cast<Eigen::Index>(2 * (knot - 1) + (r % 3 == 1 ? 0 : 1));
  };

  MatX Q = MatX::Zero(nfree, nfree);
  for (std::size_t s = 0; s < m; ++s) {
    for (int r = 0; r < 6; ++r) {
      const Eigen::Index i = slot(s, r);
      if (i < 0) continue;
      for (int c = 0; c < 6; ++c) {
        const Eigen::Index j = slot(s, c);
        if (j >= 0) Q(i, j) += H[s](r, c);
      }
    }
  }

  MatX rhs = MatX::Zero(nfree, n);
  for (std::size_t s = 0; s < m; ++s) {
    for (int r = 0; r < 6; ++r) {
      const Eigen::Index i = slot(s, r);
      if (i < 0) continue;
      // Coupling with the fixed positions at both ends of the segment.
      rhs.row(i) -= H[s](r, 0) * knots[s].transpose();
      rhs.row(i) -= H[s](r, 3) * knots[s + 1].transpose();
    }
  }

  MatX z = MatX::Zero(nfree, n);
  if (nfree > 0) {
    Eigen::LDLT<MatX> ldlt(Q);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw TrajectoryError("minimum-jerk system is singular");
    }
    z = ldlt.solve(rhs);
  }

  traj.segments.assign(static_cast<std::size_t>(n), std::vector<Quintic>(m));
  for (Eigen::Index j = 0; j < n; ++j) {
    auto boundary = [&](std::size_t knot) -> Boundary {
      if (knot == 0 || knot == m) {
        return {knots[knot](j), 0.0, 0.0};
      }
      const auto base = static_cast<Eigen::Index>(2 * (knot - 1));
      return {knots[knot](j), z(base, j), z(base + 1, j)};
    };
    for (std::size_t s = 0; s < m; ++s) {
      traj.segments[static_cast<std::size_t>(j)][s] =
          hermiteQuintic(boundary(s), boundary(s + 1), traj.knot_times[s + 1] - traj.knot_times[s]);
    }
  }
  return traj;
}

double jerkCost(const Trajectory& traj) {
  double total = 0.0;
  for (const auto& joint : traj.segments) {
    for (std::size_t s = 0; s < joint.size(); ++s) {
      total += segmentJerk(joint[s], traj.knot_times[s + 1] - traj.knot_times[s]);
    }
  }
  return total;
}

DesiredState evaluate(const Trajectory& traj, double t) {
  const auto n = static_cast<Eigen::Index>(traj.dof());
  DesiredState out{VecX::Zero(n), VecX::Zero(n), VecX::Zero(n)};
  if (t <= 0.0) {
    out.q = traj.knot_positions.front();
    return out;
  }
  if (t >= traj.duration()) {
    out.q = traj.knot_positions.back();
    return out;
  }
  const std::size_t s = segmentIndex(traj, t);
  const double tau = t - traj.knot_times[s];
  for (Eigen::Index j = 0; j < n; ++j) {
    const Quintic& c = traj.segments[static_cast<std::size_t>(j)][s];
    const auto v = velocityCoeffs(c);
    const auto a = accelCoeffs(c);
    out.q(j) = polyEval(c.data(), 5, tau);
    out.qdot(j) = polyEval(v.data(), 4, tau);
    out.qddot(j) = polyEval(a.data(), 3, tau);
  }
  return out;
}

ConstraintReport constraintReport(const Trajectory& traj, const Limits& limits) {
  ConstraintReport rep;
  for (const auto& joint : traj.segments) {
    for (std::size_t s = 0; s < joint.size(); ++s) {
      const double h = traj.knot_times[s + 1] - traj.knot_times[s];
      const auto v = velocityCoeffs(joint[s]);
      const auto a = accelCoeffs(joint[s]);
      const auto j = jerkCoeffs(joint[s]);

      std::vector<double> tv = realRootsIn(a, 0.0, h);
      tv.push_back(0.0);
      tv.push_back(h);
      for (double t : tv) {
        rep.max_vel = std::max(rep.max_vel, std::abs(polyEval(v.data(), 4, t)));
      }
      std::vector<double> ta = realRootsIn(j, 0.0, h);
      ta.push_back(0.0);
      ta.push_back(h);
      for (double t : ta) {
        rep.max_acc = std::max(rep.max_acc, std::abs(polyEval(a.data(), 3, t)));
      }
    }
  }
  const double T = traj.duration();
  const auto samples = static_cast<long>(std::floor(T * kSampleRate));
  for (long k = 0; k <= samples; ++k) {
    const DesiredState d = evaluate(traj, static_cast<double>(k) / kSampleRate);
    rep.max_vel = std::max(rep.max_vel, d.qdot.cwiseAbs().maxCoeff());
    rep.max_acc = std::max(rep.max_acc, d.qddot.cwiseAbs().maxCoeff());
  }
  rep.feasible = rep.max_vel <= limits.vel_max && rep.max_acc <= limits.acc_max;
  return rep;
}

OptimizedTrajectory optimizeTrajectory(const std::vector<VecX>& knots, const Limits& limits,
                                       double lambda, double t_max) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lambda must be > 0");
  }
  if (!(limits.vel_max > 0.0) || !(limits.acc_max > 0.0)) {
    throw std::invalid_argument("velocity and acceleration limits must be > 0");
  }
  auto feasible = [&](double T) { return constraintReport(fitMinJerk(knots, T), limits).feasible; };

  double lo = kTimeSearchLower;
  double hi = kTimeSearchUpper;
  double t_min = lo;
  if (!feasible(lo)) {
    if (!feasible(hi)) {
      throw TrajectoryError("no feasible duration in [1e-3, 60] s; waypoints are degenerate");
    }
    while (hi - lo > kBisectionTol) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
    t_min = hi;
  }

  auto objective = [&](double T) { return jerkCost(fitMinJerk(knots, T)) + lambda * T; };
  double a = t_min;
  double b = std::max(t_min, t_max);
  if (b - a > kGoldenTol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (b - a > kGoldenTol) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = objective(x2);
      }
    }
  }
  const double t_f = 0.5 * (a + b);
  return {fitMinJerk(knots, t_f), t_f, t_min};
}

OptimizedTrajectory optimizeTrajectory(const Waypoints& waypoints, const Limits& limits,
                                       double lambda, int knot_count, double t_max) {
  std::vector<VecX> knots = selectKnots(waypoints.path, knot_count);
  if (knots.size() == 1) {
    knots.push_back(knots.front());
  }
  return optimizeTrajectory(knots, limits, lambda, t_max);
}

void writeTrajectoryCsv(std::ostream& os, const Trajectory& traj, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw std::invalid_argument("sample rate must be > 0");
  }
  const std::size_t n = traj.dof();
  os << "t";
  for (const char* prefix : {"q_d", "qdot_d", "qddot_d"}) {
    for (std::size_t j = 1; j <= n; ++j) {
      os << ',' << prefix << j;
    }
  }
  os << '\n';
  std::ostringstream line;
  line << std::setprecision(12);
  auto row = [&](double t) {
    const DesiredState d = evaluate(traj, t);
    line.str("");
    line << t;
    for (const VecX* v : {&d.q, &d.qdot, &d.qddot}) {
      for (Eigen::Index j = 0; j < v->size(); ++j) {
        line << ',' << (*v)(j);
      }
    }
    os << line.str() << '\n';
  };
  const double T = traj.duration();
  const auto samples = static_cast<long>(std::floor(T * rate_hz + 1e-9));
  for (long k = 0; k <= samples; ++k) {
    row(static_cast<double>(k) / rate_hz);
  }
  if (T - static_cast<double>(samples) / rate_hz > 1e-12) {
    row(T);
  }
}

}  // namespace eapf

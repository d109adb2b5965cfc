// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "eapf/commands.hpp"
#include "eapf/config.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

using namespace eapf;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

std::string dataPath(const std::string& name) { return std::string(EAPF_DATA_DIR) + "/" + name; }

class Random {
public:
  explicit Random(unsigned seed) : rng_(seed) {}
  VecX vector(Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    VecX v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = d(rng_);
    }
    return v;
  }

private:
  std::mt19937 rng_;
};

struct Gate {
  int failures = 0;

  void report(int n, bool ok, const std::string& what, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << n << ": " << what << " (" << detail
              << ")" << std::endl;
    failures += ok ? 0 : 1;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

double seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(cell);
  }
  return out;
}

/// comparison.csv rows keyed by mode, then by column name.
std::map<std::string, std::map<std::string, std::string>> readComparison(const fs::path& path) {
  std::istringstream is(readFile(path));
  std::string line;
  std::getline(is, line);
  const auto header = split(line);
  std::map<std::string, std::map<std::string, std::string>> rows;
  while (std::getline(is, line)) {
    const auto cells = split(line);
    for (std::size_t i = 0; i < cells.size() && i < header.size(); ++i) {
      rows[cells[0]][header[i]] = cells[i];
    }
  }
  return rows;
}

/// Max |qdot_d| and |qddot_d| over a trajectory CSV; negative when the file is missing.
std::pair<double, double> trajectoryPeaks(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    return {-1.0, -1.0};
  }
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  double vel = 0.0, acc = 0.0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const double v = std::abs(std::stod(cells[i]));
      if (header[i].rfind("qdot_d", 0) == 0) {
        vel = std::max(vel, v);
      } else if (header[i].rfind("qddot_d", 0) == 0) {
        acc = std::max(acc, v);
      }
    }
  }
  return {vel, acc};
}

void dynamicsSuite(Gate& gate, const RobotModel& m) {
  const auto start = std::chrono::steady_clock::now();
  Random rnd(1);
  const double eps = 1e-6;
  double sym = 0.0, skew = 0.0, grad = 0.0;
  bool pd = true;
  for (int i = 0; i < 100; ++i) {
    const VecX q = rnd.vector(7, -pi, pi);
    const VecX qd = rnd.vector(7, -1, 1);
    const VecX x = rnd.vector(7, -1, 1);
    const MatX mm = massMatrix(m, q);
    sym = std::max(sym, (mm - mm.transpose()).norm() / mm.norm());
    pd = pd && Eigen::SelfAdjointEigenSolver<MatX>(mm).eigenvalues().minCoeff() > 0.0;
    const MatX mdot = (massMatrix(m, q + eps * qd) - massMatrix(m, q - eps * qd)) / (2 * eps);
    skew = std::max(skew, std::abs(x.dot((mdot - 2 * coriolisMatrix(m, q, qd)) * x)));
    VecX fd(7);
    for (int k = 0; k < 7; ++k) {
      VecX dq = VecX::Zero(7);
      dq(k) = eps;
      fd(k) = (potentialEnergy(m, q + dq) - potentialEnergy(m, q - dq)) / (2 * eps);
    }
    grad = std::max(grad, (gravityVector(m, q) - fd).cwiseAbs().maxCoeff());
  }

  RobotModel free = m;
  free.gravity = Vec3::Zero();
  JointState s{rnd.vector(7, -pi, pi), rnd.vector(7, -1, 1)};
  const double e0 = totalEnergy(free, s);
  double drift = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = step(free, s, VecX::Zero(7), 1e-4);
    drift = std::max(drift, std::abs(totalEnergy(free, s) - e0));
  }
  drift /= std::abs(e0);
  const double t = seconds(start);
  gate.report(1, sym <= 1e-9 && pd && skew <= 1e-6 && grad <= 1e-6 && drift <= 1e-4 && t <= 60.0,
              "dynamics suite",
              "sym " + fmt(sym) + ", pd " + (pd ? "yes" : "no") + ", skew " + fmt(skew) + ", G-dV " +
                  fmt(grad) + ", drift " + fmt(drift) + ", " + fmt(t) + " s");
}

void kinematicsSuite(Gate& gate, const RobotModel& m) {
  Random rnd(2);
  const double eps = 1e-6;
  double jac = 0.0;
  for (int i = 0; i < 100; ++i) {
    const VecX q = rnd.vector(7, -pi, pi);
    const VecX qd = rnd.vector(7, -1, 1);
    const std::size_t frame = 1 + static_cast<std::size_t>(i % 8);
    const Jacobian j = pointJacobian(m, q, frame, Vec3::Zero());
    const Vec3 fd = (forwardKinematics(m, q + eps * qd)[frame - 1].translation -
                     forwardKinematics(m, q - eps * qd)[frame - 1].translation) / (2 * eps);
    jac = std::max(jac, (j.jv * qd - fd).norm());
  }

  const double l1 = 0.7, l2 = 0.45;
  LinkParams a;
  a.mass = 1.0;
  a.inertia = Mat3::Identity() * 0.01;
  LinkParams b = a;
  b.a_prev = l1;
  RobotModel planar;
  planar.links = {a, b};
  planar.ee_offset.translation = Vec3(l2, 0, 0);
  double fk = 0.0;
  for (int i = 0; i < 100; ++i) {
    const VecX q = rnd.vector(2, -pi, pi);
    const Vec3 expect(l1 * std::cos(q(0)) + l2 * std::cos(q(0) + q(1)),
                      l1 * std::sin(q(0)) + l2 * std::sin(q(0) + q(1)), 0.0);
    fk = std::max(fk, (forwardKinematics(planar, q).back().translation - expect).norm());
  }
  gate.report(2, jac <= 1e-6 && fk <= 1e-12, "kinematics suite",
              "jacobian " + fmt(jac) + ", two-link " + fmt(fk));
}

void gradientCheck(Gate& gate) {
  const FieldParams p;
  auto ua = [&](double r) { return 0.5 * p.k_a * r * r; };
  auto ur = [&](double r) {
    const double s = 1.0 / r - 1.0 / p.rho0;
    return 0.5 * p.k_r * s * s;
  };
  double worst = 0.0;
  for (double r_e = 0.05; r_e <= 2.0; r_e += 0.05) {
    for (double r_o = 0.02; r_o < 0.39; r_o += 0.02) {
      ObstacleTerm t;
      t.r_o = r_o;
      t.dir_o = Vec3::UnitX();
      t.jv = MatX::Zero(3, 2);
      t.jv(0, 1) = 1.0;  // second coordinate moves straight away from the obstacle
      VecX r(2);
      r << r_e, 0.0;
      const VecX f = apfForce(r, {t}, p);
      const double he = 1e-6 * r_e, ho = 1e-7 * r_o;
      const double ga = (ua(r_e + he) - ua(r_e - he)) / (2 * he);
      const double gr = (ur(r_o + ho) - ur(r_o - ho)) / (2 * ho);
      worst = std::max({worst, std::abs(f(0) + ga) / std::abs(ga), std::abs(f(1) + gr) / std::abs(gr)});
    }
  }
  gate.report(3, worst <= 1e-6, "classical force is the negative potential gradient",
              "max relative error " + fmt(worst));
}

void spotValues(Gate& gate) {
  const FieldParams p;
  VecX r_e = VecX::Zero(1);
  r_e(0) = 0.2;
  const double pos = repulsivePositionMagnitude(0.2, p);
  const double kin = repulsiveKineticMagnitude(1.0, 0.5, 2.0, p);
  const double att = eapfAttractive(r_e, VecX::Zero(1), p)(0);
  const bool ok = std::abs(pos - 625.0) <= 1e-12 && std::abs(kin - 8.0) <= 1e-12 &&
                  std::abs(att + 1.0) <= 1e-12;
  gate.report(4, ok, "energy-based field spot values",
              "position " + fmt(pos) + ", kinetic " + fmt(kin) + ", attractive " + fmt(att));
}

void minJerk(Gate& gate) {
  const std::vector<VecX> unit{VecX::Zero(1), VecX::Ones(1)};
  double shape = 0.0;
  for (double T : {0.5, 1.0, 2.0}) {
    const Trajectory tr = fitMinJerk(unit, T);
    for (int i = 0; i <= 200; ++i) {
      const double tau = i / 200.0;
      shape = std::max(shape, std::abs(evaluate(tr, tau * T).q(0) -
                                       tau * tau * tau * (10 - 15 * tau + 6 * tau * tau)));
    }
  }
  const double j1 = jerkCost(fitMinJerk(unit, 1.0));
  const double j2 = jerkCost(fitMinJerk(unit, 2.0));
  const double vmax = constraintReport(fitMinJerk(unit, 1.0), Limits{}).max_vel;
  const double t_f = optimizeTrajectory(unit, Limits{}, 3600.0).t_f;
  const bool ok = shape <= 1e-10 && std::abs(j1 / 720.0 - 1) <= 1e-3 &&
                  std::abs(j2 / 22.5 - 1) <= 1e-3 && std::abs(vmax - 1.875) <= 1e-9 &&
                  std::abs(t_f - 1.0) <= 1e-3;
  gate.report(5, ok, "minimum-jerk closed forms",
              "shape " + fmt(shape) + ", jerk " + fmt(j1) + "/" + fmt(j2) + ", vmax " + fmt(vmax) +
                  ", T_f " + fmt(t_f));
}

void computedTorqueResponse(Gate& gate, const RobotModel& m) {
  const Gains g = Gains::broadcast(7, 49.0, 11.2);
  VecX q_d(7);
  q_d << 1.5, -0.8, 0.5, -0.9, 0.6, 0.3, -0.4;
  const DesiredState hold{q_d, VecX::Zero(7), VecX::Zero(7)};
  const double e0 = 0.1, wn = 7.0, zeta = 0.8, wd = wn * std::sqrt(1 - zeta * zeta);
  auto analytic = [&](double t) {
    return e0 * std::exp(-zeta * wn * t) *
           (std::cos(wd * t) + zeta / std::sqrt(1 - zeta * zeta) * std::sin(wd * t));
  };
  auto accel = [&](const JointState& s) {
    return forwardDynamics(m, s, computedTorque(m, s, hold, g));
  };
  JointState s{q_d - VecX::Constant(7, e0), VecX::Zero(7)};
  const double dt = 1e-3;
  double worst = 0.0;
  for (int k = 1; k <= 2000; ++k) {
    const VecX k1q = s.qdot, k1v = accel(s);
    const JointState s2{s.q + 0.5 * dt * k1q, s.qdot + 0.5 * dt * k1v};
    const VecX k2q = s2.qdot, k2v = accel(s2);
    const JointState s3{s.q + 0.5 * dt * k2q, s.qdot + 0.5 * dt * k2v};
    const VecX k3q = s3.qdot, k3v = accel(s3);
    const JointState s4{s.q + dt * k3q, s.qdot + dt * k3v};
    const VecX k4q = s4.qdot, k4v = accel(s4);
    s.q += dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    s.qdot += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    worst = std::max(worst, ((q_d - s.q).array() - analytic(k * dt)).abs().maxCoeff());
  }
  gate.report(6, worst <= 1e-3, "computed-torque error follows the analytic response",
              "max deviation " + fmt(worst) + " rad over 2 s");
}

void localMinimum(Gate& gate) {
  // Turntable arm of reach 1 swinging from 0 to 1 rad; a sphere just outside
  // the swept circle at 0.5 rad sits between start and goal along the arc.
  LinkParams l;
  l.mass = 1.0;
  l.com = Vec3(0.5, 0, 0);
  l.inertia = Mat3::Identity() * 0.1;
  RobotModel arm;
  arm.links = {l};
  arm.ee_offset.translation = Vec3(1.0, 0, 0);
  Scene scene;
  scene.obstacles.push_back(Sphere{1.25 * Vec3(std::cos(0.5), std::sin(0.5), 0.0), 0.1});
  FieldParams p;
  p.t_max_plan = 5.0;
  const VecX start = VecX::Zero(1), goal = VecX::Ones(1);
  const double initial = (start - goal).norm();

  const Waypoints apf = planPath(arm, scene, start, goal, p, FieldMode::Apf);
  double best = initial;
  for (const VecX& q : apf.path) {
    best = std::min(best, (q - goal).norm());
  }
  // Static equilibrium of the classical field between start and goal.
  auto force = [&](double q) {
    const FieldSample f = sampleField(arm, scene, VecX::Constant(1, q), VecX::Zero(1), goal, p);
    return apfForce(f.r_e, f.terms, p)(0);
  };
  double lo = 0.0, hi = 0.0;
  bool bracketed = false;
  for (double q = 0.01; q < 1.0 && !bracketed; q += 0.01) {
    bracketed = force(q) < 0.0;
    (bracketed ? hi : lo) = q;
  }
  for (int i = 0; i < 60 && bracketed; ++i) {
    const double mid = 0.5 * (lo + hi);
    (force(mid) > 0.0 ? lo : hi) = mid;
  }
  const double q_eq = 0.5 * (lo + hi);

  const Waypoints eapf = planPath(arm, scene, start, goal, p, FieldMode::Eapf);
  double clearance = std::numeric_limits<double>::infinity();
  for (const VecX& q : eapf.path) {
    clearance = std::min(clearance, minClearance(scene, controlPoints(forwardKinematics(arm, q))).distance);
  }
  const bool ok = bracketed && best / initial >= 0.5 && eapf.converged && clearance > 0.0;
  gate.report(7, ok, "energy-based field escapes a classical local minimum",
              "forces balance at q " + fmt(q_eq) + "; APF best goal distance " +
                  fmt(best / initial) + " of initial, at q " + fmt(apf.path.back()(0)) +
                  " after 5 s; E-APF converged " +
                  (eapf.converged ? "yes" : "no") + " at t " + fmt(eapf.times.back()) +
                  " s, clearance " + fmt(clearance) + " m");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);
  Gate gate;
  const RobotModel gen3 = loadRobot(dataPath("kinova_gen3.yaml"));

  dynamicsSuite(gate, gen3);
  kinematicsSuite(gate, gen3);
  gradientCheck(gate);
  spotValues(gate);
  minJerk(gate);
  computedTorqueResponse(gate, gen3);
  localMinimum(gate);

  const fs::path scene = dataPath("gen3_obstacle_scene.yaml");
  std::ostringstream log;
  const auto start = std::chrono::steady_clock::now();
  const int code = cmdCompare(scene, out / "a", log);
  const double elapsed = seconds(start);
  std::cout << log.str();
  auto rows = readComparison(out / "a" / "comparison.csv");
  auto num = [&](const std::string& mode, const std::string& key) {
    const auto& row = rows[mode];
    const auto it = row.find(key);
    return it == row.end() ? std::nan("") : std::strtod(it->second.c_str(), nullptr);
  };
  {
    bool ok = code == kExitOk && elapsed <= 120.0;
    std::string detail;
    for (const char* mode : {"apf", "eapf"}) {
      const double arrival = num(mode, "arrival_time");
      const bool converged = rows[mode]["converged"] == "true";
      ok = ok && converged && num(mode, "min_clearance") > 0.0 && arrival >= 1.0 && arrival <= 4.0;
      detail += std::string(mode) + ": exit " + rows[mode]["exit_code"] + ", arrival " +
                rows[mode]["arrival_time"] + ", clearance " + fmt(num(mode, "min_clearance")) +
                ", jerk " + fmt(num(mode, "executed_jerk_integral")) + "; ";
    }
    ok = ok && num("eapf", "min_clearance") >= num("apf", "min_clearance") &&
         num("eapf", "executed_jerk_integral") <= num("apf", "executed_jerk_integral");
    gate.report(8, ok, "three-obstacle Gen3 scene end-to-end comparison", detail + fmt(elapsed) + " s");
  }
  {
    bool ok = true;
    std::string detail;
    for (const char* mode : {"apf", "eapf"}) {
      const auto [vel, acc] = trajectoryPeaks(out / "a" / mode / "trajectory.csv");
      ok = ok && vel >= 0.0 && vel <= 10.0 && acc <= 50.0;
      detail += std::string(detail.empty() ? "" : "; ") + mode + " |qdot| " + fmt(vel) +
                ", |qddot| " + fmt(acc);
    }
    gate.report(9, ok, "optimized trajectories respect velocity and acceleration bounds", detail);
  }
  {
    std::ostringstream again;
    cmdCompare(scene, out / "b", again);
    bool same = true;
    for (const fs::path& f :
         {fs::path("comparison.csv"), fs::path("apf/simlog.csv"), fs::path("eapf/simlog.csv"),
          fs::path("apf/waypoints.csv"), fs::path("eapf/waypoints.csv")}) {
      same = same && readFile(out / "a" / f) == readFile(out / "b" / f);
    }
    same = same && !readFile(out / "a" / "comparison.csv").empty();
    gate.report(10, same, "compare rerun is byte-identical", same ? "identical" : "differs");
  }
  return gate.failures == 0 ? 0 : 1;
}

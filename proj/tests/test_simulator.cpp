#include <doctest.h>

#include "test_models.hpp"

#include "eapf/simulator.hpp"

#include <cmath>
#include <sstream>

using namespace eapf;
using eapf::test::Random;
using std::numbers::pi;

namespace {

VecX sceneGoal() {
  VecX g(7);
  g << 1.5, -0.8, 0.5, -0.9, 0.6, 0.3, -0.4;
  return g;
}

PipelineSpec emptySceneSpec(FieldMode mode) {
  PipelineSpec spec;
  spec.model = test::gen3();
  spec.q_start = VecX::Zero(7);
  spec.q_goal = VecX::Constant(7, 0.4);
  spec.mode = mode;
  spec.gains = Gains::broadcast(7, 49.0, 11.2);
  return spec;
}

SimRow row(double t, const VecX& q, const VecX& qdot) {
  SimRow r;
  r.t = t;
  r.q = q;
  r.qdot = qdot;
  r.tau = VecX::Zero(q.size());
  return r;
}

bool sameLog(const SimLog& a, const SimLog& b) {
  if (a.rows.size() != b.rows.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const SimRow& x = a.rows[k];
    const SimRow& y = b.rows[k];
    if (x.t != y.t || x.q != y.q || x.qdot != y.qdot || x.tau != y.tau || x.ee_pos != y.ee_pos ||
        x.dist_goal != y.dist_goal || x.dist_obs != y.dist_obs || x.vel_obs != y.vel_obs) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("gravity compensation holds the arm still") {
  const RobotModel m = test::gen3();
  Random rnd(61);
  for (int i = 0; i < 10; ++i) {
    const JointState s{rnd.vector(7, -pi, pi), VecX::Zero(7)};
    const JointState next = step(m, s, gravityVector(m, s.q), 1e-3);
    CHECK((next.q - s.q).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(next.qdot.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("RK4 step converges at fourth order") {
  const RobotModel m = test::pendulum();
  const JointState s0{VecX::Constant(1, 2.0), VecX::Constant(1, 0.5)};
  auto integrate = [&](double dt) {
    JointState s = s0;
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) {
      s = step(m, s, VecX::Zero(1), dt);
    }
    return s.q;
  };
  const VecX a = integrate(0.02), b = integrate(0.01), c = integrate(0.005);
  const double ratio = (a - b).norm() / (b - c).norm();
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("pipeline at the goal arrives immediately with pure gravity compensation") {
  PipelineSpec spec = emptySceneSpec(FieldMode::Eapf);
  spec.q_start = spec.q_goal;
  const PipelineResult r = runPipeline(spec);
  const Metrics m = computeMetrics(r.log, spec.scene, spec.model, spec.q_goal, spec.sim.arrival_tol);
  REQUIRE(m.arrival_time);
  CHECK(*m.arrival_time == 0.0);
  CHECK(m.converged);
  CHECK(m.min_clearance == std::numeric_limits<double>::infinity());
  const VecX g = gravityVector(spec.model, spec.q_goal);
  double worst = 0.0;
  for (const SimRow& row : r.log.rows) {
    worst = std::max(worst, (row.tau - g).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("empty-scene tracking reaches the goal by the end of the trajectory") {
  for (FieldMode mode : {FieldMode::Apf, FieldMode::Eapf}) {
    const PipelineSpec spec = emptySceneSpec(mode);
    const PipelineResult r = runPipeline(spec);
    CHECK(r.waypoints.converged);
    const double t_f = r.optimized.t_f;
    const SimRow* at_tf = nullptr;
    for (const SimRow& row : r.log.rows) {
      if (row.t <= t_f + 1e-12) {
        at_tf = &row;
      }
    }
    REQUIRE(at_tf != nullptr);
    CHECK((at_tf->q - spec.q_goal).norm() <= spec.sim.arrival_tol);
    const Metrics m = computeMetrics(r.log, spec.scene, spec.model, spec.q_goal, spec.sim.arrival_tol);
    CHECK(m.converged);
    CHECK(r.log.rows.back().t >= t_f + spec.sim.t_extra - 1e-9);
    CHECK(r.log.rows.back().t < t_f + spec.sim.t_extra + spec.sim.dt);
    for (std::size_t k = 1; k < r.log.rows.size(); ++k) {
      REQUIRE(r.log.rows[k].t > r.log.rows[k - 1].t);
    }
  }
}

TEST_CASE("metrics on constructed logs") {
  const RobotModel m = test::gen3();
  const Vec3 ee = forwardKinematics(m, VecX::Zero(7)).back().translation;
  Scene scene;
  scene.obstacles.push_back(Sphere{ee + Vec3(0, 0, 0.15), 0.1});

  // Sweep the base joint through the home pose: the end effector grazes the sphere at 0.05.
  SimLog sweep;
  for (int k = 0; k <= 100; ++k) {
    VecX q = VecX::Zero(7);
    q(0) = -0.5 + 0.01 * k;
    sweep.rows.push_back(row(0.01 * k, q, VecX::Zero(7)));
  }
  const Metrics g = computeMetrics(sweep, scene, m, VecX::Zero(7), 0.05);
  CHECK(g.min_clearance == doctest::Approx(0.05).epsilon(1e-9));

  SimLog still;
  for (int k = 0; k <= 50; ++k) {
    still.rows.push_back(row(0.001 * k, VecX::Constant(7, 0.2), VecX::Zero(7)));
  }
  const Metrics s = computeMetrics(still, Scene{}, m, VecX::Constant(7, 0.2), 0.05);
  CHECK(s.executed_jerk_integral == 0.0);
  CHECK(s.max_joint_speed == 0.0);
  CHECK(s.max_joint_accel == 0.0);
  REQUIRE(s.arrival_time);
  CHECK(*s.arrival_time == 0.0);

  const Metrics never = computeMetrics(still, Scene{}, m, VecX::Zero(7), 0.05);
  CHECK_FALSE(never.converged);
  CHECK_FALSE(never.arrival_time);

  // Leaving the goal ball resets arrival.
  SimLog revisit = still;
  revisit.rows[20].q(0) += 0.5;
  const Metrics late = computeMetrics(revisit, Scene{}, m, VecX::Constant(7, 0.2), 0.05);
  REQUIRE(late.arrival_time);
  CHECK(*late.arrival_time == doctest::Approx(0.021));

  // q = a t^3 has constant jerk 6a.
  const double a = 0.7, h = 1e-3, T = 2.0;
  SimLog cubic;
  for (int k = 0; k * h <= T + 1e-12; ++k) {
    const double t = k * h;
    cubic.rows.push_back(row(t, VecX::Constant(7, a * t * t * t), VecX::Constant(7, 3 * a * t * t)));
  }
  const Metrics c = computeMetrics(cubic, Scene{}, m, VecX::Zero(7), 0.05);
  CHECK(c.executed_jerk_integral == doctest::Approx(7 * 36 * a * a * T).epsilon(1e-2));
  CHECK(c.max_joint_speed == doctest::Approx(3 * a * T * T));
  CHECK(c.max_joint_accel == doctest::Approx(6 * a * T).epsilon(1e-3));

  CHECK_THROWS(computeMetrics(SimLog{}, Scene{}, m, VecX::Zero(7), 0.05));
}

TEST_CASE("tracking run is deterministic and replays its torques") {
  const RobotModel m = test::gen3();
  const Trajectory traj = fitMinJerk({VecX::Zero(7), sceneGoal()}, 1.0);
  const Gains g = Gains::broadcast(7, 49.0, 11.2);
  Scene scene;
  scene.obstacles.push_back(Sphere{Vec3(0, 0.3, 1.0), 0.1});
  SimConfig sim;
  sim.t_extra = 0.1;
  const SimLog a = simulateTracking(m, scene, traj, sceneGoal(), g, sim);
  const SimLog b = simulateTracking(m, scene, traj, sceneGoal(), g, sim);
  CHECK(sameLog(a, b));

  bool replay = true;
  for (std::size_t k = 0; k < a.rows.size(); k += 7) {
    const SimRow& r = a.rows[k];
    const VecX tau = computedTorque(m, {r.q, r.qdot}, evaluate(traj, r.t), g);
    replay = replay && tau == r.tau;
  }
  CHECK(replay);
}

TEST_CASE("work done by the logged torques equals the energy change") {
  const RobotModel m = test::gen3();
  const Trajectory traj = fitMinJerk({VecX::Zero(7), sceneGoal()}, 1.0);
  SimConfig sim;
  sim.t_extra = 0.0;
  const SimLog log = simulateTracking(m, Scene{}, traj, sceneGoal(), Gains::broadcast(7, 49.0, 11.2), sim);
  REQUIRE(log.rows.back().t == doctest::Approx(1.0));

  // The torque is held over each step, so its work is exactly tau_k . (q_{k+1} - q_k).
  double work = 0.0;
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
    work += log.rows[k].tau.dot(log.rows[k + 1].q - log.rows[k].q);
  }
  const SimRow& first = log.rows.front();
  const SimRow& last = log.rows.back();
  const double de = totalEnergy(m, {last.q, last.qdot}) - totalEnergy(m, {first.q, first.qdot});
  REQUIRE(std::abs(de) > 1.0);
  CHECK(std::abs(work - de) <= 1e-3 * std::abs(de));
}

TEST_CASE("csv layouts") {
  SimLog log;
  log.rows.push_back(row(0.0, VecX::Zero(7), VecX::Zero(7)));
  std::ostringstream os;
  writeSimLogCsv(os, log);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "t,q1,q2,q3,q4,q5,q6,q7,qd1,qd2,qd3,qd4,qd5,qd6,qd7,tau1,tau2,tau3,tau4,tau5,tau6,tau7,"
        "ee_x,ee_y,ee_z,dist_goal,vel_goal,dist_obs,vel_obs");

  Waypoints wp;
  wp.path = {VecX::Zero(2), VecX::Ones(2)};
  wp.times = {0.0, 0.001};
  std::ostringstream ws;
  writeWaypointsCsv(ws, wp);
  CHECK(ws.str() == "t,q1,q2\n0,0,0\n0.001,1,1\n");

  std::ostringstream ms;
  writeMetrics(ms, Metrics{});
  CHECK(ms.str().find("arrival_time=none\n") != std::string::npos);
  CHECK(ms.str().find("converged=false\n") != std::string::npos);
}

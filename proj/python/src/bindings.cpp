#include "eapf/commands.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace eapf;

namespace {

Eigen::Matrix4d toMatrix(const Transform& t) { return t.matrix(); }

py::dict waypointsToDict(const Waypoints& wp) {
  py::dict d;
  d["path"] = wp.path;
  d["times"] = wp.times;
  d["converged"] = wp.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-based artificial potential field planning, trajectory optimization "
            "and computed-torque tracking";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TrajectoryError>(m, "TrajectoryError", PyExc_RuntimeError);

  py::enum_<FieldMode>(m, "FieldMode")
      .value("APF", FieldMode::Apf)
      .value("EAPF", FieldMode::Eapf);

  py::class_<FieldParams>(m, "FieldParams")
      .def(py::init<>())
      .def_readwrite("k_a", &FieldParams::k_a)
      .def_readwrite("k_r", &FieldParams::k_r)
      .def_readwrite("rho0", &FieldParams::rho0)
      .def_readwrite("gamma", &FieldParams::gamma)
      .def_readwrite("mu_base", &FieldParams::mu_base)
      .def_readwrite("eps_v", &FieldParams::eps_v)
      .def_readwrite("eps_r", &FieldParams::eps_r)
      .def_readwrite("damping", &FieldParams::damping)
      .def_readwrite("dt_plan", &FieldParams::dt_plan)
      .def_readwrite("t_max_plan", &FieldParams::t_max_plan)
      .def_readwrite("goal_tol", &FieldParams::goal_tol);

  py::class_<RobotModel>(m, "RobotModel")
      .def_property_readonly("dof", &RobotModel::dof)
      .def_readwrite("gravity", &RobotModel::gravity);

  py::class_<Scene>(m, "Scene")
      .def(py::init<>())
      .def("add_sphere",
           [](Scene& s, const Vec3& center, double radius) {
             Sphere sp{center, radius};
             validate(Obstacle{sp});
             s.obstacles.emplace_back(sp);
           },
           py::arg("center"), py::arg("radius"))
      .def("add_cylinder",
           [](Scene& s, const Vec3& base_center, const Vec3& axis, double height, double radius) {
             Cylinder c{base_center, axis, height, radius};
             validate(Obstacle{c});
             s.obstacles.emplace_back(c);
           },
           py::arg("base_center"), py::arg("axis"), py::arg("height"), py::arg("radius"))
      .def("__len__", [](const Scene& s) { return s.obstacles.size(); });

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_readonly("robot", &ScenarioConfig::robot)
      .def_readonly("q_start", &ScenarioConfig::q_start)
      .def_readonly("q_goal", &ScenarioConfig::q_goal)
      .def_readwrite("field", &ScenarioConfig::field)
      .def_readwrite("lambda_", &ScenarioConfig::lambda)
      .def_readwrite("knot_count", &ScenarioConfig::knot_count)
      .def("scene", &ScenarioConfig::scene)
      .def("serialize", &serializeScenario);

  m.def("load_robot", &loadRobot, py::arg("path"));
  m.def("load_scenario", &parseScenario, py::arg("path"));

  m.def("forward_kinematics",
        [](const RobotModel& model, const VecX& q) {
          std::vector<Eigen::Matrix4d> out;
          for (const Transform& t : forwardKinematics(model, q)) {
            out.push_back(toMatrix(t));
          }
          return out;
        },
        py::arg("model"), py::arg("q"),
        "Homogeneous transforms of frames 1..n followed by the end effector.");
  m.def("point_jacobian",
        [](const RobotModel& model, const VecX& q, std::size_t frame_index) {
          const Jacobian j = pointJacobian(model, q, frame_index, Vec3::Zero());
          return py::make_tuple(j.jv, j.jw);
        },
        py::arg("model"), py::arg("q"), py::arg("frame_index"));

  m.def("mass_matrix", &massMatrix, py::arg("model"), py::arg("q"));
  m.def("coriolis_matrix", &coriolisMatrix, py::arg("model"), py::arg("q"), py::arg("qdot"));
  m.def("gravity_vector", &gravityVector, py::arg("model"), py::arg("q"));
  m.def("forward_dynamics",
        [](const RobotModel& model, const VecX& q, const VecX& qdot, const VecX& tau) {
          return forwardDynamics(model, {q, qdot}, tau);
        },
        py::arg("model"), py::arg("q"), py::arg("qdot"), py::arg("tau"));

  m.def("repulsive_position_magnitude", &repulsivePositionMagnitude, py::arg("r_o"),
        py::arg("params"));
  m.def("repulsive_kinetic_magnitude", &repulsiveKineticMagnitude, py::arg("v_o"),
        py::arg("a_o"), py::arg("mu_o"), py::arg("params"));
  m.def("eapf_attractive", &eapfAttractive, py::arg("r_e"), py::arg("a_e"), py::arg("params"));
  m.def("mu_schedule", &muSchedule, py::arg("r_o"), py::arg("params"));
  m.def("min_clearance",
        [](const RobotModel& model, const Scene& scene, const VecX& q) {
          return minClearance(scene, controlPoints(forwardKinematics(model, q))).distance;
        },
        py::arg("model"), py::arg("scene"), py::arg("q"));

  m.def("plan_path",
        [](const RobotModel& model, const Scene& scene, const VecX& q_start, const VecX& q_goal,
           const FieldParams& params, FieldMode mode) {
          Waypoints wp;
          {
            py::gil_scoped_release release;
            wp = planPath(model, scene, q_start, q_goal, params, mode);
          }
          return waypointsToDict(wp);
        },
        py::arg("model"), py::arg("scene"), py::arg("q_start"), py::arg("q_goal"),
        py::arg("params"), py::arg("mode"));

  m.def("min_jerk_quintic",
        [](double dq, double t_f) {
          const Trajectory traj = fitMinJerk({VecX::Zero(1), VecX::Constant(1, dq)}, t_f);
          return py::make_tuple(jerkCost(traj), constraintReport(traj, Limits{}).max_vel);
        },
        py::arg("dq"), py::arg("t_f"),
        "Jerk cost and peak speed of the single-segment rest-to-rest fit.");
  m.def("optimize_knots",
        [](const std::vector<VecX>& knots, double lambda, double vel_max, double acc_max) {
          const OptimizedTrajectory o = optimizeTrajectory(knots, {vel_max, acc_max}, lambda);
          return py::make_tuple(o.t_f, o.t_min, jerkCost(o.trajectory));
        },
        py::arg("knots"), py::arg("lambda_"), py::arg("vel_max") = 10.0,
        py::arg("acc_max") = 50.0);

  m.def("run_scenario",
        [](const ScenarioConfig& config, FieldMode mode, const std::filesystem::path& out_dir) {
          const RunOutcome r = runScenario(config, mode, out_dir);
          py::dict d;
          d["exit_code"] = r.exit_code;
          d["message"] = r.message;
          d["planner_converged"] = r.planner_converged;
          d["t_f"] = r.t_f;
          if (r.metrics) {
            d["arrival_time"] = r.metrics->arrival_time;
            d["min_clearance"] = r.metrics->min_clearance;
            d["executed_jerk_integral"] = r.metrics->executed_jerk_integral;
          }
          return d;
        },
        py::arg("config"), py::arg("mode"), py::arg("out_dir"));
}

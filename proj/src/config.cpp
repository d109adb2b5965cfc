#include "eapf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace eapf {

namespace {

class Reader {
public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                         const std::string& msg) const {
    std::ostringstream os;
    os << source_;
    const YAML::Mark mark = node.Mark();
    if (!mark.is_null()) {
      os << ':' << mark.line + 1 << ':' << mark.column + 1;
    }
    os << ": " << (path.empty() ? "<root>" : path) << ": " << msg;
    throw ConfigError(os.str());
  }

  YAML::Node load(const std::string& text) const {
    try {
      return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      std::ostringstream os;
      os << source_ << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
      throw ConfigError(os.str());
    }
  }

  void requireMap(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) {
      fail(node, path, "expected a mapping");
    }
  }

  void checkKeys(const YAML::Node& map, const std::string& path,
                 const std::set<std::string>& allowed) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        fail(kv.first, join(path, key), "unknown key");
      }
    }
  }

  YAML::Node child(const YAML::Node& map, const std::string& key, const std::string& path) const {
    const YAML::Node node = map[key];
    if (!node) {
      fail(map, join(path, key), "missing required field '" + key + "'");
    }
    return node;
  }

  double number(const YAML::Node& node, const std::string& path) const {
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, path, "expected a number");
    }
  }

  int integer(const YAML::Node& node, const std::string& path) const {
    try {
      return node.as<int>();
    } catch (const YAML::Exception&) {
      fail(node, path, "expected an integer");
    }
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) {
      fail(node, path, "expected a string");
    }
    return node.as<std::string>();
  }

  double number(const YAML::Node& map, const std::string& key, const std::string& path) const {
    return number(child(map, key, path), join(path, key));
  }

  double numberOr(const YAML::Node& map, const std::string& key, const std::string& path,
                  double fallback) const {
    return map[key] ? number(map[key], join(path, key)) : fallback;
  }

  VecX vector(const YAML::Node& node, const std::string& path, long expected = -1) const {
    if (!node.IsSequence()) {
      fail(node, path, "expected a list of numbers");
    }
    if (expected >= 0 && static_cast<long>(node.size()) != expected) {
      std::ostringstream msg;
      msg << "expected " << expected << " entries, got " << node.size();
      fail(node, path, msg.str());
    }
    VecX v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = number(node[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
  }

  Vec3 vec3(const YAML::Node& node, const std::string& path) const { return vector(node, path, 3); }

  Mat3 mat3(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence() || node.size() != 3) {
      fail(node, path, "expected a 3x3 matrix as three rows");
    }
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
      m.row(r) = vec3(node[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
    }
    return m;
  }

  void checkVersion(const YAML::Node& root) const {
    const YAML::Node v = child(root, "version", "");
    if (integer(v, "version") != kSchemaVersion) {
      fail(v, "version", "unsupported schema version (expected " +
                             std::to_string(kSchemaVersion) + ")");
    }
  }

  template <typename Check>
  void guard(const YAML::Node& node, const std::string& path, Check&& check) const {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      fail(node, path, e.what());
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

private:
  std::string source_;
};

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string() + ": cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RobotModel parseRobotNode(const Reader& rd, const YAML::Node& root) {
  rd.requireMap(root, "");
  rd.checkKeys(root, "", {"version", "name", "gravity", "ee_offset", "links"});
  rd.checkVersion(root);

  RobotModel model;
  if (root["gravity"]) {
    model.gravity = rd.vec3(root["gravity"], "gravity");
  }
  if (root["ee_offset"]) {
    const YAML::Node ee = root["ee_offset"];
    rd.requireMap(ee, "ee_offset");
    rd.checkKeys(ee, "ee_offset", {"rotation", "translation"});
    if (ee["rotation"]) {
      model.ee_offset.rotation = rd.mat3(ee["rotation"], "ee_offset.rotation");
    }
    if (ee["translation"]) {
      model.ee_offset.translation = rd.vec3(ee["translation"], "ee_offset.translation");
    }
    if (!model.ee_offset.isOrthonormal()) {
      rd.fail(ee, "ee_offset.rotation", "rotation is not orthonormal with det +1");
    }
  }

  const YAML::Node links = rd.child(root, "links", "");
  if (!links.IsSequence() || links.size() == 0) {
    rd.fail(links, "links", "expected a non-empty list of links");
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    const YAML::Node ln = links[i];
    const std::string path = "links[" + std::to_string(i) + "]";
    rd.requireMap(ln, path);
    rd.checkKeys(ln, path, {"alpha_prev", "a_prev", "d", "theta_offset", "mass", "com", "inertia"});
    LinkParams link;
    link.alpha_prev = rd.number(ln, "alpha_prev", path);
    link.a_prev = rd.number(ln, "a_prev", path);
    link.d = rd.number(ln, "d", path);
    link.theta_offset = rd.numberOr(ln, "theta_offset", path, 0.0);
    link.mass = rd.number(ln, "mass", path);
    link.com = rd.vec3(rd.child(ln, "com", path), path + ".com");
    link.inertia = rd.mat3(rd.child(ln, "inertia", path), path + ".inertia");
    try {
      validate(link, i);
    } catch (const ModelError& e) {
      rd.fail(ln, path, e.what());
    }
    model.links.push_back(link);
  }
  return model;
}

void emitVector(YAML::Emitter& out, const VecX& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out << v(i);
  }
  out << YAML::EndSeq;
}

void emitMatrix(YAML::Emitter& out, const Mat3& m) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int r = 0; r < 3; ++r) {
    emitVector(out, m.row(r).transpose());
  }
  out << YAML::EndSeq;
}

}  // namespace

RobotModel parseRobot(const std::string& text, const std::string& source_name) {
  Reader rd(source_name);
  return parseRobotNode(rd, rd.load(text));
}

RobotModel loadRobot(const std::filesystem::path& path) {
  return parseRobot(readFile(path), path.string());
}

std::string serializeRobot(const RobotModel& model, const std::string& name) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << kSchemaVersion;
  out << YAML::Key << "name" << YAML::Value << name;
  out << YAML::Key << "gravity" << YAML::Value;
  emitVector(out, model.gravity);
  out << YAML::Key << "ee_offset" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rotation" << YAML::Value;
  emitMatrix(out, model.ee_offset.rotation);
  out << YAML::Key << "translation" << YAML::Value;
  emitVector(out, model.ee_offset.translation);
  out << YAML::EndMap;
  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const LinkParams& l : model.links) {
    out << YAML::BeginMap;
    out << YAML::Key << "alpha_prev" << YAML::Value << l.alpha_prev;
    out << YAML::Key << "a_prev" << YAML::Value << l.a_prev;
    out << YAML::Key << "d" << YAML::Value << l.d;
    out << YAML::Key << "theta_offset" << YAML::Value << l.theta_offset;
    out << YAML::Key << "mass" << YAML::Value << l.mass;
    out << YAML::Key << "com" << YAML::Value;
    emitVector(out, l.com);
    out << YAML::Key << "inertia" << YAML::Value;
    emitMatrix(out, l.inertia);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

Obstacle ObstacleSpec::toObstacle() const {
  if (type == "sphere") {
    return Sphere{center, radius};
  }
  return Cylinder{center - 0.5 * height * axis, axis, height, radius};
}

Scene ScenarioConfig::scene() const {
  Scene s;
  for (const ObstacleSpec& o : obstacles) {
    s.obstacles.push_back(o.toObstacle());
  }
  return s;
}

const ModeGains& ScenarioConfig::gainsFor(FieldMode mode) const {
  return mode == FieldMode::Apf ? apf_gains : eapf_gains;
}

PipelineSpec ScenarioConfig::pipeline(FieldMode mode) const {
  PipelineSpec spec;
  spec.model = robot;
  spec.scene = scene();
  spec.q_start = q_start;
  spec.q_goal = q_goal;
  spec.field = field;
  spec.mode = mode;
  spec.limits = limits;
  spec.lambda = lambda;
  spec.knot_count = knot_count;
  const ModeGains& g = gainsFor(mode);
  spec.gains = Gains::broadcast(robot.dof(), g.kp, g.kd);
  spec.sim = sim;
  return spec;
}

bool sameScenario(const ScenarioConfig& a, const ScenarioConfig& b) {
  auto sameField = [](const FieldParams& x, const FieldParams& y) {
    return x.k_a == y.k_a && x.k_r == y.k_r && x.rho0 == y.rho0 && x.gamma == y.gamma &&
           x.mu_base == y.mu_base && x.eps_v == y.eps_v && x.eps_r == y.eps_r &&
           x.damping == y.damping && x.dt_plan == y.dt_plan && x.t_max_plan == y.t_max_plan &&
           x.goal_tol == y.goal_tol;
  };
  return a.version == b.version && a.robot_file == b.robot_file && a.q_start == b.q_start &&
         a.q_goal == b.q_goal && a.obstacles == b.obstacles && sameField(a.field, b.field) &&
         a.lambda == b.lambda && a.knot_count == b.knot_count &&
         a.limits.vel_max == b.limits.vel_max && a.limits.acc_max == b.limits.acc_max &&
         a.apf_gains == b.apf_gains && a.eapf_gains == b.eapf_gains && a.sim.dt == b.sim.dt &&
         a.sim.t_extra == b.sim.t_extra && a.sim.arrival_tol == b.sim.arrival_tol;
}

ScenarioConfig parseScenarioString(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::string& source_name) {
  Reader rd(source_name);
  const YAML::Node root = rd.load(text);
  rd.requireMap(root, "");
  rd.checkKeys(root, "", {"version", "name", "robot_file", "q_start", "q_goal", "obstacles",
                          "field", "optimizer", "gains", "sim"});
  rd.checkVersion(root);

  ScenarioConfig cfg;
  const YAML::Node robot_node = rd.child(root, "robot_file", "");
  cfg.robot_file = rd.text(robot_node, "robot_file");
  cfg.robot_path = base_dir / cfg.robot_file;
  if (!std::filesystem::exists(cfg.robot_path)) {
    rd.fail(robot_node, "robot_file", "file not found: " + cfg.robot_path.string());
  }
  cfg.robot = loadRobot(cfg.robot_path);
  const auto n = static_cast<long>(cfg.robot.dof());

  cfg.q_start = rd.vector(rd.child(root, "q_start", ""), "q_start", n);
  cfg.q_goal = rd.vector(rd.child(root, "q_goal", ""), "q_goal", n);

  const YAML::Node obstacles = rd.child(root, "obstacles", "");
  if (!obstacles.IsSequence()) {
    rd.fail(obstacles, "obstacles", "expected a list (use [] for an empty scene)");
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const YAML::Node on = obstacles[i];
    const std::string path = "obstacles[" + std::to_string(i) + "]";
    rd.requireMap(on, path);
    ObstacleSpec spec;
    spec.type = rd.text(rd.child(on, "type", path), path + ".type");
    if (spec.type == "sphere") {
      rd.checkKeys(on, path, {"type", "center", "radius"});
    } else if (spec.type == "cylinder") {
      rd.checkKeys(on, path, {"type", "center", "radius", "axis", "height"});
      if (on["axis"]) {
        spec.axis = rd.vec3(on["axis"], path + ".axis");
      }
      spec.height = rd.number(on, "height", path);
    } else {
      rd.fail(on["type"], path + ".type", "expected 'sphere' or 'cylinder'");
    }
    spec.center = rd.vec3(rd.child(on, "center", path), path + ".center");
    spec.radius = rd.number(on, "radius", path);
    rd.guard(on, path, [&] { validate(spec.toObstacle()); });
    cfg.obstacles.push_back(spec);
  }

  const YAML::Node field = rd.child(root, "field", "");
  rd.requireMap(field, "field");
  rd.checkKeys(field, "field", {"k_a", "k_r", "rho0", "gamma", "mu_base", "eps_v", "eps_r",
                                "damping", "dt_plan", "t_max_plan", "goal_tol"});
  FieldParams& fp = cfg.field;
  fp.k_a = rd.number(field, "k_a", "field");
  fp.k_r = rd.number(field, "k_r", "field");
  fp.rho0 = rd.number(field, "rho0", "field");
  fp.gamma = rd.number(field, "gamma", "field");
  fp.mu_base = rd.numberOr(field, "mu_base", "field", fp.mu_base);
  fp.eps_v = rd.numberOr(field, "eps_v", "field", fp.eps_v);
  fp.eps_r = rd.numberOr(field, "eps_r", "field", fp.eps_r);
  fp.damping = rd.numberOr(field, "damping", "field", fp.damping);
  fp.dt_plan = rd.numberOr(field, "dt_plan", "field", fp.dt_plan);
  fp.t_max_plan = rd.numberOr(field, "t_max_plan", "field", fp.t_max_plan);
  fp.goal_tol = rd.numberOr(field, "goal_tol", "field", fp.goal_tol);
  try {
    validate(fp);
  } catch (const std::invalid_argument& e) {
    // Point at the offending key when the message names one.
    const std::string what = e.what();
    const std::string key = what.substr(0, what.find(' '));
    const YAML::Node at = field[key] ? field[key] : field;
    rd.fail(at, "field." + key, what);
  }

  if (const YAML::Node opt = root["optimizer"]) {
    rd.requireMap(opt, "optimizer");
    rd.checkKeys(opt, "optimizer", {"lambda", "knot_count", "vel_max", "acc_max"});
    cfg.lambda = rd.numberOr(opt, "lambda", "optimizer", cfg.lambda);
    if (opt["knot_count"]) {
      cfg.knot_count = rd.integer(opt["knot_count"], "optimizer.knot_count");
    }
    cfg.limits.vel_max = rd.numberOr(opt, "vel_max", "optimizer", cfg.limits.vel_max);
    cfg.limits.acc_max = rd.numberOr(opt, "acc_max", "optimizer", cfg.limits.acc_max);
    if (!(cfg.lambda > 0.0)) rd.fail(opt, "optimizer.lambda", "must be > 0");
    if (cfg.knot_count < 2) rd.fail(opt, "optimizer.knot_count", "must be >= 2");
    if (!(cfg.limits.vel_max > 0.0)) rd.fail(opt, "optimizer.vel_max", "must be > 0");
    if (!(cfg.limits.acc_max > 0.0)) rd.fail(opt, "optimizer.acc_max", "must be > 0");
  }

  const YAML::Node gains = rd.child(root, "gains", "");
  rd.requireMap(gains, "gains");
  rd.checkKeys(gains, "gains", {"apf", "eapf"});
  for (const char* mode : {"apf", "eapf"}) {
    const std::string path = std::string("gains.") + mode;
    const YAML::Node g = rd.child(gains, mode, "gains");
    rd.requireMap(g, path);
    rd.checkKeys(g, path, {"kp", "kd"});
    ModeGains mg{rd.number(g, "kp", path), rd.number(g, "kd", path)};
    if (!(mg.kp > 0.0) || !(mg.kd > 0.0)) {
      rd.fail(g, path, "kp and kd must be > 0");
    }
    (std::string(mode) == "apf" ? cfg.apf_gains : cfg.eapf_gains) = mg;
  }

  if (const YAML::Node sim = root["sim"]) {
    rd.requireMap(sim, "sim");
    rd.checkKeys(sim, "sim", {"dt", "t_extra", "arrival_tol"});
    cfg.sim.dt = rd.numberOr(sim, "dt", "sim", cfg.sim.dt);
    cfg.sim.t_extra = rd.numberOr(sim, "t_extra", "sim", cfg.sim.t_extra);
    cfg.sim.arrival_tol = rd.numberOr(sim, "arrival_tol", "sim", cfg.sim.arrival_tol);
    if (!(cfg.sim.dt > 0.0)) rd.fail(sim, "sim.dt", "must be > 0");
    if (!(cfg.sim.t_extra >= 0.0)) rd.fail(sim, "sim.t_extra", "must be >= 0");
    if (!(cfg.sim.arrival_tol > 0.0)) rd.fail(sim, "sim.arrival_tol", "must be > 0");
  }
  return cfg;
}

ScenarioConfig parseScenario(const std::filesystem::path& path) {
  return parseScenarioString(readFile(path), path.parent_path(), path.string());
}

std::string serializeScenario(const ScenarioConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << c.version;
  out << YAML::Key << "robot_file" << YAML::Value << c.robot_file;
  out << YAML::Key << "q_start" << YAML::Value;
  emitVector(out, c.q_start);
  out << YAML::Key << "q_goal" << YAML::Value;
  emitVector(out, c.q_goal);

  out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const ObstacleSpec& o : c.obstacles) {
    out << YAML::BeginMap;
    out << YAML::Key << "type" << YAML::Value << o.type;
    out << YAML::Key << "center" << YAML::Value;
    emitVector(out, o.center);
    out << YAML::Key << "radius" << YAML::Value << o.radius;
    if (o.type == "cylinder") {
      out << YAML::Key << "axis" << YAML::Value;
      emitVector(out, o.axis);
      out << YAML::Key << "height" << YAML::Value << o.height;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const FieldParams& f = c.field;
  out << YAML::Key << "field" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k_a" << YAML::Value << f.k_a;
  out << YAML::Key << "k_r" << YAML::Value << f.k_r;
  out << YAML::Key << "rho0" << YAML::Value << f.rho0;
  out << YAML::Key << "gamma" << YAML::Value << f.gamma;
  out << YAML::Key << "mu_base" << YAML::Value << f.mu_base;
  out << YAML::Key << "eps_v" << YAML::Value << f.eps_v;
  out << YAML::Key << "eps_r" << YAML::Value << f.eps_r;
  out << YAML::Key << "damping" << YAML::Value << f.damping;
  out << YAML::Key << "dt_plan" << YAML::Value << f.dt_plan;
  out << YAML::Key << "t_max_plan" << YAML::Value << f.t_max_plan;
  out << YAML::Key << "goal_tol" << YAML::Value << f.goal_tol;
  out << YAML::EndMap;

  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "lambda" << YAML::Value << c.lambda;
  out << YAML::Key << "knot_count" << YAML::Value << c.knot_count;
  out << YAML::Key << "vel_max" << YAML::Value << c.limits.vel_max;
  out << YAML::Key << "acc_max" << YAML::Value << c.limits.acc_max;
  out << YAML::EndMap;

  out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
  for (FieldMode mode : {FieldMode::Apf, FieldMode::Eapf}) {
    const ModeGains& g = c.gainsFor(mode);
    out << YAML::Key << toString(mode) << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "kp" << YAML::Value << g.kp;
    out << YAML::Key << "kd" << YAML::Value << g.kd;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;

  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << c.sim.dt;
  out << YAML::Key << "t_extra" << YAML::Value << c.sim.t_extra;
  out << YAML::Key << "arrival_tol" << YAML::Value << c.sim.arrival_tol;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace eapf

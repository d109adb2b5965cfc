/**
 * @file config.hpp
 * @brief Robot parameter files and scenario files (YAML, schema version 1).
 *
 * Both loaders reject unknown keys and report problems as
 * `<file>:<line>:<column>: <key path>: <message>`.
 */
#ifndef EAPF_CONFIG_HPP_
#define EAPF_CONFIG_HPP_

#include "eapf/simulator.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace eapf {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

RobotModel loadRobot(const std::filesystem::path& path);
RobotModel parseRobot(const std::string& text, const std::string& source_name = "<robot>");
std::string serializeRobot(const RobotModel& model, const std::string& name = "robot");

struct ObstacleSpec {
  std::string type;  ///< "sphere" or "cylinder"
  Vec3 center = Vec3::Zero();  ///< sphere centre / cylinder mid-point
  double radius = 0.0;
  Vec3 axis = Vec3::UnitZ();   ///< cylinder only
  double height = 0.0;         ///< cylinder only

  Obstacle toObstacle() const;
  bool operator==(const ObstacleSpec&) const = default;
};

struct ModeGains {
  double kp = 0.0;
  double kd = 0.0;
  bool operator==(const ModeGains&) const = default;
};

struct ScenarioConfig {
  int version = kSchemaVersion;
  std::string robot_file;  ///< as written, relative to the scenario file
  std::filesystem::path robot_path;
  RobotModel robot;
  VecX q_start;
  VecX q_goal;
  std::vector<ObstacleSpec> obstacles;
  FieldParams field;
  double lambda = 100.0;
  int knot_count = 10;
  Limits limits;
  ModeGains apf_gains{25.0, 10.0};
  ModeGains eapf_gains{49.0, 11.2};
  SimConfig sim;

  Scene scene() const;
  const ModeGains& gainsFor(FieldMode mode) const;
  PipelineSpec pipeline(FieldMode mode) const;
};

/// Field-by-field equality of everything a scenario file carries.
bool sameScenario(const ScenarioConfig& a, const ScenarioConfig& b);

ScenarioConfig parseScenario(const std::filesystem::path& path);
ScenarioConfig parseScenarioString(const std::string& text, const std::filesystem::path& base_dir,
                                   const std::string& source_name = "<scenario>");
std::string serializeScenario(const ScenarioConfig& config);

}  // namespace eapf

#endif  // EAPF_CONFIG_HPP_

#pragma once

// Deterministic kinematic scene simulator: scripted waypoint trajectories,
// bounding-sphere occlusion against a fixed camera, and noisy pose
// measurements with optional sensor dropout.

#include "opf/pose_math.hpp"
#include "opf/random.hpp"
#include "opf/tracker.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opf {

struct Waypoint {
  double t = 0.0;  ///< seconds
  Pose6DoF pose;
};

struct SceneObject {
  std::string id;
  double radius = 0.05;  ///< bounding sphere (m)
  bool opaque = true;
  std::vector<Waypoint> waypoints;  ///< strictly increasing times
};

struct CameraModel {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d look = -Eigen::Vector3d::UnitZ();
};

struct NoiseSpec {
  double sigma_t = 0.002;  ///< m
  double sigma_r = 0.01;   ///< rad
  double dropout = 0.0;    ///< per-object, per-frame probability in [0, 1)
};

struct ScenarioSpec {
  std::string name;
  double frame_rate = 30.0;
  CameraModel camera;
  NoiseSpec noise;
  std::vector<SceneObject> objects;

  /// Throws InvalidConfig on any violated invariant, naming the field.
  void validate() const;
  /// Time of the last waypoint over all objects.
  double duration() const;
  /// Frames 0..floor(duration * frame_rate), inclusive.
  std::size_t frame_count() const;
  std::optional<std::size_t> index_of(const std::string& id) const;
};

/// Piecewise-linear translation, shortest-path per-component Euler
/// interpolation; clamped outside the waypoint span.
Pose6DoF object_pose_at(const SceneObject& obj, double t);

struct Visibility {
  std::optional<std::size_t> occluder;  ///< nearest blocking object, if any
  bool occluded() const { return occluder.has_value(); }
};

/// Occluded iff another opaque object's sphere meets the open camera-target
/// segment nearer to the camera than the target.
Visibility is_occluded(const CameraModel& camera, std::span<const SceneObject> objects,
                       std::size_t target, double t);

struct GeneratedFrame {
  MeasurementFrame measurements;
  std::vector<Pose6DoF> truth;
  std::vector<std::optional<std::size_t>> occluders;
  std::vector<bool> dropped;
};

/// Measurements for frame index `frame` (t = frame / frame_rate). Noise for
/// every object is drawn whether or not it is visible, so the draws depend
/// only on (rng, frame, object).
GeneratedFrame generate_frame(const ScenarioSpec& scene, std::int64_t frame,
                              const NoiseSpec& noise, const RandomStream& rng);

/// Parses the JSON scenario format; unknown keys are rejected. Errors carry
/// the parser position or the offending field path.
ScenarioSpec parse_scenario(const std::string& text, const std::string& name = "scenario");
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioSpec& scene);

std::vector<std::string> builtin_scenario_names();
/// Throws InvalidConfig for an unknown name.
ScenarioSpec builtin_scenario(const std::string& name);

}  // namespace opf

#include "opf/error.hpp"
#include "opf/scenario.hpp"

#include <cmath>

namespace opf {

namespace {

// Keeps estimate jitter of a resting object well inside the 0.01 m static
// threshold over a 50-frame window.
constexpr double kSensorSigmaT = 0.001;

Waypoint at(double t, double x, double y, double z, double yaw = 0.0) {
  return {t, Pose6DoF(Eigen::Vector3d(x, y, z), Eigen::Vector3d(0.0, 0.0, yaw))};
}

SceneObject object(std::string id, double radius, std::vector<Waypoint> waypoints) {
  SceneObject obj;
  obj.id = std::move(id);
  obj.radius = radius;
  obj.waypoints = std::move(waypoints);
  return obj;
}

// Ball hidden under the left mug, carried across the table and revealed; it
// then rolls (spinning about z) to the far corner, passing under the tray.
ScenarioSpec general_op() {
  ScenarioSpec s;
  s.name = "general_op";
  s.camera.position = {0.55, 0.0, 0.49};
  s.noise.sigma_t = kSensorSigmaT;

  std::vector<Waypoint> ball = {at(0.0, 0.4, 0.0, 0.0), at(3.0, 0.4, 0.0, 0.0),
                                at(5.5, 0.8, 0.11, 0.0), at(7.3, 0.8, 0.11, 0.0)};
  const Eigen::Vector3d roll_from(0.8, 0.11, 0.0);
  const Eigen::Vector3d roll_to(0.3, -0.35, 0.0);
  const double t0 = 7.3;
  const double t1 = 14.1;
  const double spin = 1.0;  // rad/s
  const int steps = 17;     // 0.4 s apart, keeps each yaw step far below pi
  for (int i = 1; i <= steps; ++i) {
    const double s_frac = static_cast<double>(i) / steps;
    const double t = t0 + s_frac * (t1 - t0);
    const Eigen::Vector3d p = roll_from + s_frac * (roll_to - roll_from);
    ball.push_back(at(t, p.x(), p.y(), p.z(), wrap_angle(spin * (t - t0))));
  }
  ball.push_back(at(14.5, roll_to.x(), roll_to.y(), roll_to.z(), wrap_angle(spin * (t1 - t0))));

  s.objects.push_back(object("ball", 0.02, std::move(ball)));
  s.objects.push_back(object("mug_left", 0.06,
                             {at(0.0, 0.4, 0.15, 0.03), at(1.0, 0.4, 0.15, 0.03),
                              at(2.5, 0.4, 0.04, 0.03), at(3.0, 0.4, 0.04, 0.03),
                              at(5.5, 0.8, 0.15, 0.03), at(6.0, 0.8, 0.15, 0.03),
                              at(6.7, 0.8, 0.30, 0.03)}));
  s.objects.push_back(object("mug_right", 0.06,
                             {at(0.0, 0.4, -0.15, 0.03), at(1.0, 0.4, -0.15, 0.03),
                              at(2.5, 0.4, -0.08, 0.03), at(3.0, 0.4, -0.08, 0.03),
                              at(4.0, 0.3, -0.12, 0.03)}));
  s.objects.push_back(object("tray", 0.08, {at(0.0, 0.55, -0.09, 0.2)}));
  return s;
}

// Mug slid across the table at 0.1 m/s while the end effector hovers over it
// for the middle of the path.
ScenarioSpec sugar_dropping() {
  ScenarioSpec s;
  s.name = "sugar_dropping";
  s.camera.position = {0.55, 0.0, 0.8};
  s.noise.sigma_t = kSensorSigmaT;

  const double yaw_rate = 0.15;
  auto mug_y = [](double t) { return 0.45 - 0.1 * (t - 1.0); };
  s.objects.push_back(object("mug", 0.05,
                             {at(0.0, 0.55, 0.45, 0.0), at(1.0, 0.55, 0.45, 0.0),
                              at(10.0, 0.55, -0.45, 0.0, yaw_rate * 9.0),
                              at(10.5, 0.55, -0.45, 0.0, yaw_rate * 9.0)}));
  s.objects.push_back(object("end_effector", 0.05,
                             {at(0.0, 0.30, 0.30, 0.35), at(2.3, 0.30, 0.30, 0.35),
                              at(3.3, 0.55, 0.85 * mug_y(3.3), 0.12),
                              at(6.0, 0.55, 0.85 * mug_y(6.0), 0.12),
                              at(7.0, 0.55, 0.85 * mug_y(6.0), 0.12),
                              at(8.0, 0.35, -0.05, 0.35)}));
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() { return {"general_op", "sugar_dropping"}; }

ScenarioSpec builtin_scenario(const std::string& name) {
  if (name == "general_op" || name == "general_op_tracking") return general_op();
  if (name == "sugar_dropping") return sugar_dropping();
  throw Error(ErrorCode::InvalidConfig, "unknown builtin scenario '" + name + "'");
}

}  // namespace opf

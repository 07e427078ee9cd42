#include "opf/scenario.hpp"

#include "opf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace opf {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, "field " + path + ": " + msg);
}

}  // namespace

void ScenarioSpec::validate() const {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) field_error("/frame_rate", "must be > 0");
  if (!camera.position.allFinite()) field_error("/camera/position", "must be finite");
  if (!camera.look.allFinite() || std::abs(camera.look.norm() - 1.0) > 1e-9) {
    field_error("/camera/look", "must be a unit vector");
  }
  if (!(noise.sigma_t >= 0.0)) field_error("/noise/sigma_t", "must be >= 0");
  if (!(noise.sigma_r >= 0.0)) field_error("/noise/sigma_r", "must be >= 0");
  if (!(noise.dropout >= 0.0 && noise.dropout < 1.0)) field_error("/noise/dropout", "must be in [0, 1)");
  if (objects.empty()) field_error("/objects", "needs at least one object");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& obj = objects[i];
    const std::string path = "/objects/" + std::to_string(i);
    if (obj.id.empty()) field_error(path + "/id", "must be non-empty");
    if (!seen.insert(obj.id).second) field_error(path + "/id", "duplicate id '" + obj.id + "'");
    if (!(obj.radius > 0.0) || !std::isfinite(obj.radius)) field_error(path + "/radius", "must be > 0");
    if (obj.waypoints.empty()) field_error(path + "/waypoints", "needs at least one waypoint");
    for (std::size_t w = 0; w < obj.waypoints.size(); ++w) {
      const double t = obj.waypoints[w].t;
      const std::string wpath = path + "/waypoints/" + std::to_string(w) + "/t";
      if (!(t >= 0.0) || !std::isfinite(t)) field_error(wpath, "must be finite and >= 0");
      if (w > 0 && !(t > obj.waypoints[w - 1].t)) field_error(wpath, "times must strictly increase");
    }
  }
}

double ScenarioSpec::duration() const {
  double d = 0.0;
  for (const auto& obj : objects) d = std::max(d, obj.waypoints.back().t);
  return d;
}

std::size_t ScenarioSpec::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration() * frame_rate + 1e-9)) + 1;
}

std::optional<std::size_t> ScenarioSpec::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == id) return i;
  }
  return std::nullopt;
}

Pose6DoF object_pose_at(const SceneObject& obj, double t) {
  const auto& wps = obj.waypoints;
  if (t <= wps.front().t) return wps.front().pose;
  if (t >= wps.back().t) return wps.back().pose;
  const auto upper = std::upper_bound(wps.begin(), wps.end(), t,
                                      [](double v, const Waypoint& w) { return v < w.t; });
  const Waypoint& b = *upper;
  const Waypoint& a = *(upper - 1);
  const double s = (t - a.t) / (b.t - a.t);
  const Eigen::Vector3d translation =
      a.pose.translation() + s * (b.pose.translation() - a.pose.translation());
  const Eigen::Vector3d euler = a.pose.euler() + s * angle_diff(b.pose.euler(), a.pose.euler());
  return Pose6DoF(translation, euler);
}

Visibility is_occluded(const CameraModel& camera, std::span<const SceneObject> objects,
                       std::size_t target, double t) {
  const Eigen::Vector3d goal = object_pose_at(objects[target], t).translation();
  const Eigen::Vector3d ray = goal - camera.position;
  const double length = ray.norm();
  Visibility vis;
  if (length == 0.0) return vis;
  const Eigen::Vector3d dir = ray / length;
  double nearest = length;
  for (std::size_t j = 0; j < objects.size(); ++j) {
    if (j == target || !objects[j].opaque) continue;
    const Eigen::Vector3d to_center = object_pose_at(objects[j], t).translation() - camera.position;
    const double along = to_center.dot(dir);
    const double miss2 = to_center.squaredNorm() - along * along;
    const double r2 = objects[j].radius * objects[j].radius;
    if (miss2 >= r2) continue;
    const double half = std::sqrt(r2 - miss2);
    const double enter = along - half;
    const double exit = along + half;
    if (exit <= 0.0 || enter >= length) continue;
    const double first_hit = std::max(enter, 0.0);
    if (!vis.occluder || first_hit < nearest) {
      nearest = first_hit;
      vis.occluder = j;
    }
  }
  return vis;
}

GeneratedFrame generate_frame(const ScenarioSpec& scene, std::int64_t frame,
                              const NoiseSpec& noise, const RandomStream& rng) {
  const double t = static_cast<double>(frame) / scene.frame_rate;
  const std::size_t n = scene.objects.size();
  GeneratedFrame out;
  out.measurements.frame = frame;
  out.truth.reserve(n);
  out.occluders.reserve(n);
  out.dropped.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Pose6DoF truth = object_pose_at(scene.objects[i], t);
    const RandomStream draw = rng.derive({static_cast<std::uint64_t>(frame), i});
    const Eigen::Vector3d dt = noise.sigma_t * draw.normal3(0);
    const Eigen::Vector3d dr = noise.sigma_r * draw.normal3(1);
    const bool dropped = draw.uniform(1u << 20) < noise.dropout;
    const Visibility vis = is_occluded(scene.camera, scene.objects, i, t);

    MeasurementFrame::Entry entry{scene.objects[i].id, std::nullopt};
    if (!vis.occluded() && !dropped) {
      entry.pose = Pose6DoF(truth.translation() + dt, truth.euler() + dr);
    }
    out.measurements.entries.push_back(std::move(entry));
    out.truth.push_back(truth);
    out.occluders.push_back(vis.occluder);
    out.dropped.push_back(dropped);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) field_error(path.empty() ? "/" : path, "must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) field_error(path + "/" + item.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) field_error(path + "/" + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "must be a number");
  return v.get<double>();
}

Eigen::Vector3d vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) field_error(path, "must be an array of 3 numbers");
  return {number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2")};
}

Pose6DoF pose6(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 6) field_error(path, "must be an array of 6 numbers");
  std::array<double, 6> a{};
  for (std::size_t i = 0; i < 6; ++i) {
    a[i] = number(v[i], path + "/" + std::to_string(i));
    if (!std::isfinite(a[i])) field_error(path + "/" + std::to_string(i), "must be finite");
  }
  return Pose6DoF::from_array(a);
}

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

ScenarioSpec parse_scenario(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root, "", {"frame_rate", "camera", "noise", "objects"});

  ScenarioSpec spec;
  spec.name = name;
  if (root.contains("frame_rate")) spec.frame_rate = number(root["frame_rate"], "/frame_rate");

  const json& camera = require(root, "", "camera");
  reject_unknown(camera, "/camera", {"position", "look"});
  spec.camera.position = vec3(require(camera, "/camera", "position"), "/camera/position");
  const Eigen::Vector3d look = vec3(require(camera, "/camera", "look"), "/camera/look");
  if (!(look.norm() > 0.0)) field_error("/camera/look", "must be non-zero");
  spec.camera.look = look.normalized();

  if (root.contains("noise")) {
    const json& noise = root["noise"];
    reject_unknown(noise, "/noise", {"sigma_t", "sigma_r", "dropout"});
    if (noise.contains("sigma_t")) spec.noise.sigma_t = number(noise["sigma_t"], "/noise/sigma_t");
    if (noise.contains("sigma_r")) spec.noise.sigma_r = number(noise["sigma_r"], "/noise/sigma_r");
    if (noise.contains("dropout")) spec.noise.dropout = number(noise["dropout"], "/noise/dropout");
  }

  const json& objects = require(root, "", "objects");
  if (!objects.is_array()) field_error("/objects", "must be an array");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = "/objects/" + std::to_string(i);
    const json& o = objects[i];
    reject_unknown(o, path, {"id", "radius", "opaque", "waypoints"});
    SceneObject obj;
    const json& id = require(o, path, "id");
    if (!id.is_string()) field_error(path + "/id", "must be a string");
    obj.id = id.get<std::string>();
    obj.radius = number(require(o, path, "radius"), path + "/radius");
    if (o.contains("opaque")) {
      if (!o["opaque"].is_boolean()) field_error(path + "/opaque", "must be a boolean");
      obj.opaque = o["opaque"].get<bool>();
    }
    const json& wps = require(o, path, "waypoints");
    if (!wps.is_array()) field_error(path + "/waypoints", "must be an array");
    for (std::size_t w = 0; w < wps.size(); ++w) {
      const std::string wpath = path + "/waypoints/" + std::to_string(w);
      reject_unknown(wps[w], wpath, {"t", "pose"});
      Waypoint wp;
      wp.t = number(require(wps[w], wpath, "t"), wpath + "/t");
      wp.pose = pose6(require(wps[w], wpath, "pose"), wpath + "/pose");
      obj.waypoints.push_back(wp);
    }
    spec.objects.push_back(std::move(obj));
  }
  spec.validate();
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), path.stem().string());
}

std::string scenario_to_json(const ScenarioSpec& scene) {
  json root;
  root["frame_rate"] = scene.frame_rate;
  root["camera"] = {{"position", vec_json(scene.camera.position)},
                    {"look", vec_json(scene.camera.look)}};
  root["noise"] = {{"sigma_t", scene.noise.sigma_t},
                   {"sigma_r", scene.noise.sigma_r},
                   {"dropout", scene.noise.dropout}};
  root["objects"] = json::array();
  for (const auto& obj : scene.objects) {
    json o{{"id", obj.id}, {"radius", obj.radius}, {"opaque", obj.opaque}};
    o["waypoints"] = json::array();
    for (const auto& w : obj.waypoints) {
      o["waypoints"].push_back({{"t", w.t}, {"pose", w.pose.to_array()}});
    }
    root["objects"].push_back(std::move(o));
  }
  return root.dump(2);
}

}  // namespace opf

#include "opf/harness.hpp"

#include "opf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>

namespace opf {

using nlohmann::json;

namespace {

// Stream tags separating simulator noise from filter noise under one seed.
constexpr std::uint64_t kSimulatorStream = 0x73696d;
constexpr std::uint64_t kFilterStream = 0x66696c;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::InvalidConfig, "config " + path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_error(path.empty() ? "/" : path, "must be an object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) config_error(path + "/" + item.key(), "unknown key");
  }
}

void read_number(const json& obj, const std::string& path, const char* key, double& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number()) config_error(path + "/" + key, "must be a number");
  out = obj[key].get<double>();
}

void read_count(const json& obj, const std::string& path, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number_unsigned()) config_error(path + "/" + key, "must be a non-negative integer");
  out = obj[key].get<std::size_t>();
}

void read_bool(const json& obj, const std::string& path, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_boolean()) config_error(path + "/" + key, "must be a boolean");
  out = obj[key].get<bool>();
}

}  // namespace

void RunConfig::validate() const {
  filter_config.validate();
  op.validate();
  if (eps_safe && !(*eps_safe > 0.0)) config_error("/feedback/eps_safe", "must be > 0");
  FeedbackConfig fb = feedback;
  if (eps_safe) fb.eps_safe = *eps_safe;
  fb.validate();
  if (noise) {
    if (!(noise->sigma_t >= 0.0) || !(noise->sigma_r >= 0.0)) {
      config_error("/noise", "standard deviations must be >= 0");
    }
    if (!(noise->dropout >= 0.0 && noise->dropout < 1.0)) {
      config_error("/noise/dropout", "must be in [0, 1)");
    }
  }
}

void apply_config_overrides(RunConfig& cfg, const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(root, "", {"op", "feedback", "filter", "noise", "target"});

  if (root.contains("op")) {
    const json& op = root["op"];
    reject_unknown(op, "/op",
                   {"history", "delta_t", "delta_r", "eps_occ", "kappa", "offset_preserving"});
    read_count(op, "/op", "history", cfg.op.history);
    read_number(op, "/op", "delta_t", cfg.op.delta_t);
    read_number(op, "/op", "delta_r", cfg.op.delta_r);
    read_number(op, "/op", "eps_occ", cfg.op.eps_occ);
    read_number(op, "/op", "kappa", cfg.op.kappa);
    read_bool(op, "/op", "offset_preserving", cfg.op.offset_preserving);
  }
  if (root.contains("feedback")) {
    const json& fb = root["feedback"];
    reject_unknown(fb, "/feedback", {"eps_safe", "kp_nom", "kd_nom", "steepness"});
    if (fb.contains("eps_safe")) {
      double eps = 0.0;
      read_number(fb, "/feedback", "eps_safe", eps);
      cfg.eps_safe = eps;
    }
    read_number(fb, "/feedback", "kp_nom", cfg.feedback.kp_nom);
    read_number(fb, "/feedback", "kd_nom", cfg.feedback.kd_nom);
    read_number(fb, "/feedback", "steepness", cfg.feedback.steepness);
  }
  if (root.contains("filter")) {
    const json& f = root["filter"];
    reject_unknown(f, "/filter",
                   {"particles", "process_std_t", "process_std_r", "meas_std_t", "meas_std_r",
                    "init_spread_t", "init_spread_r"});
    read_count(f, "/filter", "particles", cfg.filter_config.particles);
    read_number(f, "/filter", "process_std_t", cfg.filter_config.process_std_t);
    read_number(f, "/filter", "process_std_r", cfg.filter_config.process_std_r);
    read_number(f, "/filter", "meas_std_t", cfg.filter_config.meas_std_t);
    read_number(f, "/filter", "meas_std_r", cfg.filter_config.meas_std_r);
    read_number(f, "/filter", "init_spread_t", cfg.filter_config.init_spread_t);
    read_number(f, "/filter", "init_spread_r", cfg.filter_config.init_spread_r);
  }
  if (root.contains("noise")) {
    const json& n = root["noise"];
    reject_unknown(n, "/noise", {"sigma_t", "sigma_r", "dropout"});
    NoiseSpec spec = cfg.noise.value_or(NoiseSpec{});
    read_number(n, "/noise", "sigma_t", spec.sigma_t);
    read_number(n, "/noise", "sigma_r", spec.sigma_r);
    read_number(n, "/noise", "dropout", spec.dropout);
    cfg.noise = spec;
  }
  if (root.contains("target")) {
    if (!root["target"].is_string()) config_error("/target", "must be a string");
    cfg.target = root["target"].get<std::string>();
  }
  cfg.validate();
}

void load_config_overrides(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_overrides(cfg, buffer.str());
}

ScenarioSpec resolve_scenario(const std::string& name_or_path) {
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end() ||
      name_or_path == "general_op_tracking") {
    return builtin_scenario(name_or_path);
  }
  if (!std::filesystem::exists(name_or_path)) {
    throw Error(ErrorCode::InvalidConfig,
                "'" + name_or_path + "' is neither a builtin scenario nor a readable file");
  }
  return load_scenario(name_or_path);
}

std::string to_string(FilterKind kind) {
  return kind == FilterKind::Standard ? "pf" : "opf";
}

FilterKind parse_filter_kind(const std::string& text) {
  if (text == "pf") return FilterKind::Standard;
  if (text == "opf") return FilterKind::ObjectPermanence;
  throw Error(ErrorCode::InvalidConfig, "filter must be 'pf' or 'opf', got '" + text + "'");
}

std::vector<const LogRow*> ResultLog::track(std::size_t object) const {
  std::vector<const LogRow*> out;
  for (const auto& row : rows) {
    if (row.object == object && row.hypothesis == 0) out.push_back(&row);
  }
  return out;
}

double error_distance(std::span<const Pose6DoF> estimates, std::span<const Pose6DoF> truth,
                      Portion portion) {
  if (estimates.size() != truth.size()) {
    throw Error(ErrorCode::InvalidInput, "error_distance: tracks have different lengths (" +
                                             std::to_string(estimates.size()) + " vs " +
                                             std::to_string(truth.size()) + ")");
  }
  if (estimates.empty()) throw Error(ErrorCode::InvalidInput, "error_distance: empty tracks");
  double sum = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const Eigen::Vector3d d =
        portion == Portion::Translation
            ? Eigen::Vector3d(estimates[k].translation() - truth[k].translation())
            : angle_diff(estimates[k].euler(), truth[k].euler());
    sum += d.norm();
  }
  return sum / static_cast<double>(estimates.size());
}

ResultLog run_experiment(const RunConfig& cfg) {
  return run_experiment(cfg, resolve_scenario(cfg.scenario));
}

ResultLog run_experiment(const RunConfig& cfg, const ScenarioSpec& scene_in) {
  cfg.validate();
  ScenarioSpec scene = scene_in;
  if (cfg.noise) scene.noise = *cfg.noise;
  scene.validate();

  std::size_t target = 0;
  if (cfg.target) {
    const auto idx = scene.index_of(*cfg.target);
    if (!idx) config_error("/target", "no object '" + *cfg.target + "' in scenario");
    target = *idx;
  }

  FilterConfig filter = cfg.filter_config;
  filter.frame_rate = scene.frame_rate;

  ResultLog log;
  log.scenario = scene.name;
  log.filter = cfg.filter;
  log.seed = cfg.seed;
  log.eps_safe = cfg.eps_safe.value_or(100.0 * filter.noise().measurement_trace());
  FeedbackConfig feedback = cfg.feedback;
  feedback.eps_safe = log.eps_safe;
  feedback.validate();
  for (const auto& obj : scene.objects) log.ids.push_back(obj.id);

  const RandomStream root(cfg.seed);
  const RandomStream sim = root.derive(kSimulatorStream);
  const std::size_t frames = scene.frame_count();

  GeneratedFrame current = generate_frame(scene, 0, scene.noise, sim);
  std::vector<Tracker::Initial> initial;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& m = current.measurements.entries[i].pose;
    initial.push_back({scene.objects[i].id, m ? *m : current.truth[i]});
  }
  Tracker tracker(std::move(initial), cfg.filter, filter, cfg.op,
                  root.derive(kFilterStream).key());

  log.rows.reserve(frames * scene.objects.size());
  for (std::size_t k = 0; k < frames; ++k) {
    if (k > 0) current = generate_frame(scene, static_cast<std::int64_t>(k), scene.noise, sim);
    const auto reports = tracker.step(current.measurements);
    for (const auto& r : reports) {
      LogRow row;
      row.frame = static_cast<std::int64_t>(k);
      row.object = r.object;
      row.hypothesis = r.hypothesis;
      row.truth = current.truth[r.object];
      row.estimate = r.estimate.pose;
      row.measurement = current.measurements.entries[r.object].pose;
      row.occluded = !row.measurement.has_value();
      row.occluder = current.occluders[r.object];
      row.inferred_occluder = r.occluder;
      row.fed_measurement = r.fed_measurement;
      row.hypotheses = tracker.hypothesis_count(r.object);
      row.trace_q = r.trace_q;
      row.velocity = r.velocity;
      row.alert = safety_status(r.trace_q, feedback) == SafetyStatus::Alert;
      log.rows.push_back(std::move(row));
    }
  }

  std::vector<Pose6DoF> est;
  std::vector<Pose6DoF> gt;
  for (const LogRow* row : log.track(target)) {
    est.push_back(row->estimate);
    gt.push_back(row->truth);
  }
  log.summary.target = scene.objects[target].id;
  log.summary.translation_error = error_distance(est, gt, Portion::Translation);
  log.summary.rotation_error = error_distance(est, gt, Portion::Rotation);
  return log;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& out, const ResultLog& log) {
  out << kCsvHeader << '\n';
  for (const auto& row : log.rows) {
    out << row.frame << ',' << log.ids[row.object] << ',' << row.hypothesis;
    for (double v : row.truth.to_array()) out << ',' << format_number(v);
    for (double v : row.estimate.to_array()) out << ',' << format_number(v);
    out << ',' << (row.occluded ? 1 : 0) << ',';
    if (row.occluder) out << log.ids[*row.occluder];
    out << ',' << format_number(row.trace_q) << ',' << (row.alert ? 1 : 0) << '\n';
  }
}

std::string to_csv(const ResultLog& log) {
  std::ostringstream out;
  write_csv(out, log);
  return out.str();
}

}  // namespace opf

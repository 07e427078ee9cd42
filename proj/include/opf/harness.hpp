#pragma once

// Experiment runner: steps a PF or OPF ensemble through a scenario, records
// one row per (frame, live hypothesis) and summarizes tracking error.

#include "opf/feedback.hpp"
#include "opf/op_update.hpp"
#include "opf/scenario.hpp"
#include "opf/tracker.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opf {

struct RunConfig {
  std::string scenario = "general_op";  ///< builtin name or path to a scenario file
  FilterKind filter = FilterKind::ObjectPermanence;
  std::uint64_t seed = 1;
  FilterConfig filter_config;
  OpConfig op;
  FeedbackConfig feedback;
  /// Unset: 100x the visible trace of Q.
  std::optional<double> eps_safe;
  std::optional<NoiseSpec> noise;      ///< overrides the scenario's noise block
  std::optional<std::string> target;   ///< object scored by the summary (default: first)

  void validate() const;
};

/// Applies a JSON override document with optional blocks `op`, `feedback`,
/// `filter`, `noise` and key `target`. Unknown keys are rejected.
void apply_config_overrides(RunConfig& cfg, const std::string& json_text);
void load_config_overrides(RunConfig& cfg, const std::filesystem::path& path);

/// Builtin name first, then file path.
ScenarioSpec resolve_scenario(const std::string& name_or_path);

std::string to_string(FilterKind kind);
/// "pf" or "opf"; throws InvalidConfig otherwise.
FilterKind parse_filter_kind(const std::string& text);

struct LogRow {
  std::int64_t frame = 0;
  std::size_t object = 0;
  int hypothesis = 0;
  Pose6DoF truth;
  Pose6DoF estimate;
  bool occluded = false;                      ///< no measurement this frame
  std::optional<std::size_t> occluder;        ///< simulator ground truth
  std::optional<std::size_t> inferred_occluder;
  std::optional<Pose6DoF> measurement;        ///< real measurement, if any
  std::optional<Pose6DoF> fed_measurement;    ///< real or virtual y fed to the update
  std::size_t hypotheses = 1;                 ///< live hypotheses for the object
  double trace_q = 0.0;
  double velocity = 0.0;  ///< v behind the covariance growth (m/s)
  bool alert = false;
};

struct RunSummary {
  std::string target;
  double translation_error = 0.0;
  double rotation_error = 0.0;
};

struct ResultLog {
  std::string scenario;
  FilterKind filter = FilterKind::ObjectPermanence;
  std::uint64_t seed = 0;
  double eps_safe = 0.0;
  std::vector<std::string> ids;
  std::vector<LogRow> rows;
  RunSummary summary;

  /// Primary-hypothesis rows of one object, in frame order.
  std::vector<const LogRow*> track(std::size_t object) const;
};

/// Mean Euclidean distance between aligned tracks, per portion. Rotation
/// differences are wrapped per component. Throws InvalidInput on a length
/// mismatch or empty tracks.
double error_distance(std::span<const Pose6DoF> estimates, std::span<const Pose6DoF> truth,
                      Portion portion);

ResultLog run_experiment(const RunConfig& cfg);
ResultLog run_experiment(const RunConfig& cfg, const ScenarioSpec& scene);

inline constexpr const char* kCsvHeader =
    "frame,object_id,hypothesis,gt_tx,gt_ty,gt_tz,gt_th,gt_ph,gt_ps,est_tx,est_ty,est_tz,"
    "est_th,est_ph,est_ps,occluded,occluder_id,trace_q,alert";

void write_csv(std::ostream& out, const ResultLog& log);
std::string to_csv(const ResultLog& log);

// ---------------------------------------------------------------------------
// Multi-run comparison

struct ReportRow {
  FilterKind filter = FilterKind::Standard;
  std::string metric;  ///< "translation" or "rotation"
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation; 0 for a single run
  std::size_t runs = 0;
};

struct CompareReport {
  std::string scenario;
  std::vector<ReportRow> rows;  ///< PF rows first, then OPF; translation before rotation

  const ReportRow& row(FilterKind filter, const std::string& metric) const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Aggregates per-filter error statistics. Throws InvalidInput for an empty
/// list or logs from different scenarios.
CompareReport compare_report(std::span<const ResultLog> logs);

/// Runs both filters on seeds base .. base + count - 1, sorted by seed.
std::vector<ResultLog> run_comparison(const RunConfig& base, std::size_t count);

/// Ordering check used by `compare --check`: OPF mean <= ratio * PF mean for
/// both metrics.
bool ordering_holds(const CompareReport& report, double ratio = 0.5);

// ---------------------------------------------------------------------------
// Charts

struct Series {
  std::string name;
  std::vector<double> values;
};

/// Minimal SVG line chart of one or more series over frame index.
std::string svg_line_chart(const std::string& title, std::span<const Series> series,
                           int width = 800, int height = 320);

/// Error and trace series of the scored object's primary hypothesis.
std::vector<Series> chart_series(const ResultLog& log);

/// printf-style "%.9g".
std::string format_number(double v);

}  // namespace opf

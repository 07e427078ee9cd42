#include "opf/error.hpp"
#include "opf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace opf {

namespace {

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

Stats stats(const std::vector<double>& xs) {
  Stats s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string filter_label(FilterKind kind) { return kind == FilterKind::Standard ? "PF" : "OPF"; }

}  // namespace

CompareReport compare_report(std::span<const ResultLog> logs) {
  if (logs.empty()) throw Error(ErrorCode::InvalidInput, "compare_report: no runs");
  CompareReport report;
  report.scenario = logs.front().scenario;
  for (const auto& log : logs) {
    if (log.scenario != report.scenario) {
      throw Error(ErrorCode::InvalidInput, "compare_report: runs from different scenarios");
    }
  }
  for (FilterKind kind : {FilterKind::Standard, FilterKind::ObjectPermanence}) {
    std::vector<double> t;
    std::vector<double> r;
    for (const auto& log : logs) {
      if (log.filter != kind) continue;
      t.push_back(log.summary.translation_error);
      r.push_back(log.summary.rotation_error);
    }
    if (t.empty()) continue;
    const Stats st = stats(t);
    const Stats sr = stats(r);
    report.rows.push_back({kind, "translation", st.mean, st.stddev, t.size()});
    report.rows.push_back({kind, "rotation", sr.mean, sr.stddev, r.size()});
  }
  return report;
}

const ReportRow& CompareReport::row(FilterKind filter, const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.filter == filter && r.metric == metric) return r;
  }
  throw Error(ErrorCode::InvalidInput, "no " + metric + " row for " + to_string(filter));
}

std::string CompareReport::to_text() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-12s %14s %14s %5s\n", "filter", "metric", "mean", "std",
                "runs");
  out << "scenario: " << scenario << '\n' << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-8s %-12s %14.6g %14.6g %5zu\n",
                  filter_label(r.filter).c_str(), r.metric.c_str(), r.mean, r.stddev, r.runs);
    out << line;
  }
  return out.str();
}

std::string CompareReport::to_csv() const {
  std::ostringstream out;
  out << "scenario,filter,metric,mean,std,runs\n";
  for (const auto& r : rows) {
    out << scenario << ',' << to_string(r.filter) << ',' << r.metric << ','
        << format_number(r.mean) << ',' << format_number(r.stddev) << ',' << r.runs << '\n';
  }
  return out.str();
}

std::vector<ResultLog> run_comparison(const RunConfig& base, std::size_t count) {
  const ScenarioSpec scene = resolve_scenario(base.scenario);
  std::vector<ResultLog> logs;
  for (std::size_t i = 0; i < count; ++i) {
    for (FilterKind kind : {FilterKind::Standard, FilterKind::ObjectPermanence}) {
      RunConfig cfg = base;
      cfg.filter = kind;
      cfg.seed = base.seed + i;
      logs.push_back(run_experiment(cfg, scene));
    }
  }
  std::stable_sort(logs.begin(), logs.end(),
                   [](const ResultLog& a, const ResultLog& b) { return a.seed < b.seed; });
  return logs;
}

bool ordering_holds(const CompareReport& report, double ratio) {
  for (const char* metric : {"translation", "rotation"}) {
    const double pf = report.row(FilterKind::Standard, metric).mean;
    const double op = report.row(FilterKind::ObjectPermanence, metric).mean;
    if (!(op <= ratio * pf)) return false;
  }
  return true;
}

std::vector<Series> chart_series(const ResultLog& log) {
  const auto it = std::find(log.ids.begin(), log.ids.end(), log.summary.target);
  const std::size_t target = it == log.ids.end() ? 0 : static_cast<std::size_t>(it - log.ids.begin());
  Series t{"translation error (m)", {}};
  Series r{"rotation error (rad)", {}};
  Series q{"trace(alpha Q)", {}};
  for (const LogRow* row : log.track(target)) {
    t.values.push_back((row->estimate.translation() - row->truth.translation()).norm());
    r.values.push_back(angle_diff(row->estimate.euler(), row->truth.euler()).norm());
    q.values.push_back(row->trace_q);
  }
  return {t, r, q};
}

std::string svg_line_chart(const std::string& title, std::span<const Series> series, int width,
                           int height) {
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};
  const double margin = 40.0;
  std::size_t length = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    length = std::max(length, s.values.size());
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
    hi = lo + 1.0;
  }
  const double w = width - 2 * margin;
  const double h = height - 2 * margin;
  auto px = [&](std::size_t i) {
    return margin + (length > 1 ? w * static_cast<double>(i) / static_cast<double>(length - 1) : 0.0);
  };
  auto py = [&](double v) { return margin + h * (1.0 - (v - lo) / (hi - lo)); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
  out << "<text x=\"2\" y=\"" << margin + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_number(hi) << "</text>\n";
  out << "<text x=\"2\" y=\"" << margin + h << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << format_number(lo) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      out << format_number(px(i)) << ',' << format_number(py(v)) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - margin - 160 << "\" y=\"" << margin + 14 + 14 * s
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
        << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace opf

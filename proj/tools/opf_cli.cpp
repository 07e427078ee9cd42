#include "opf/error.hpp"
#include "opf/harness.hpp"
#include "opf/scenario.hpp"
#include "opf/tracker.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCheckFailed = 3;

struct CommonOptions {
  std::string scenario = "general_op";
  std::string filter = "opf";
  std::uint64_t seed = 1;
  std::size_t particles = 5000;
  std::string config;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_filter) {
  cmd->add_option("--scenario", o.scenario, "builtin name or scenario file")->capture_default_str();
  if (with_filter) {
    cmd->add_option("--filter", o.filter, "pf or opf")
        ->check(CLI::IsMember({"pf", "opf"}))
        ->capture_default_str();
  }
  cmd->add_option("--seed", o.seed, "random seed (first seed for compare)")->capture_default_str();
  cmd->add_option("--particles", o.particles, "particles per portion")->capture_default_str();
  cmd->add_option("--config", o.config, "JSON overrides for op/feedback/filter/noise");
  cmd->add_option("--out", o.out, "output file");
}

opf::RunConfig make_config(const CommonOptions& o) {
  opf::RunConfig cfg;
  cfg.scenario = o.scenario;
  cfg.filter = opf::parse_filter_kind(o.filter);
  cfg.seed = o.seed;
  cfg.filter_config.particles = o.particles;
  if (!o.config.empty()) opf::load_config_overrides(cfg, o.config);
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw opf::Error(opf::ErrorCode::InvalidConfig, "cannot write " + path);
  out << text;
}

int cmd_run(const CommonOptions& o, const std::string& svg) {
  const opf::RunConfig cfg = make_config(o);
  const opf::ResultLog log = opf::run_experiment(cfg);
  const std::string csv = opf::to_csv(log);
  if (o.out.empty()) {
    std::cout << csv;
  } else {
    write_file(o.out, csv);
  }
  if (!svg.empty()) {
    const auto series = opf::chart_series(log);
    write_file(svg, opf::svg_line_chart(log.scenario + " / " + opf::to_string(log.filter) +
                                            " / " + log.summary.target,
                                        series));
  }
  std::fprintf(stderr, "%s %s seed=%llu target=%s translation_error=%s rotation_error=%s\n",
               log.scenario.c_str(), opf::to_string(log.filter).c_str(),
               static_cast<unsigned long long>(log.seed), log.summary.target.c_str(),
               opf::format_number(log.summary.translation_error).c_str(),
               opf::format_number(log.summary.rotation_error).c_str());
  return 0;
}

int cmd_compare(const CommonOptions& o, std::size_t seeds, bool check) {
  if (seeds == 0) throw opf::Error(opf::ErrorCode::InvalidConfig, "--seeds must be >= 1");
  const opf::RunConfig cfg = make_config(o);
  const auto start = std::chrono::steady_clock::now();
  const auto logs = opf::run_comparison(cfg, seeds);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const opf::CompareReport report = opf::compare_report(logs);
  std::cout << report.to_text();
  std::printf("elapsed: %.2f s\n", seconds);
  if (!o.out.empty()) write_file(o.out, report.to_csv());
  if (check) {
    const bool ok = opf::ordering_holds(report);
    std::printf("check (OPF <= 0.5 x PF, both metrics): %s\n", ok ? "PASS" : "FAIL");
    if (!ok) return kExitCheckFailed;
  }
  return 0;
}

int cmd_scenarios(const std::string& dump) {
  if (!dump.empty()) {
    std::cout << opf::scenario_to_json(opf::builtin_scenario(dump)) << '\n';
    return 0;
  }
  for (const auto& name : opf::builtin_scenario_names()) {
    const opf::ScenarioSpec s = opf::builtin_scenario(name);
    std::printf("%-16s %zu objects, %zu frames at %g Hz\n", name.c_str(), s.objects.size(),
                s.frame_count(), s.frame_rate);
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const opf::ScenarioSpec s = opf::load_scenario(path);
  std::printf("ok: %s, %zu objects, %zu frames at %g Hz\n", s.name.c_str(), s.objects.size(),
              s.frame_count(), s.frame_rate);
  return 0;
}

// K objects on circles, all visible, stepped for a fixed number of frames.
int cmd_bench(std::size_t objects, std::size_t particles, std::size_t frames, int threads) {
  if (threads > 0) omp_set_num_threads(threads);
  opf::FilterConfig filter;
  filter.particles = particles;
  std::vector<opf::Tracker::Initial> initial;
  for (std::size_t i = 0; i < objects; ++i) {
    initial.push_back({"obj" + std::to_string(i),
                       opf::Pose6DoF(Eigen::Vector3d(0.1 * static_cast<double>(i), 0.0, 0.0),
                                     Eigen::Vector3d::Zero())});
  }
  opf::Tracker tracker(initial, opf::FilterKind::ObjectPermanence, filter, opf::OpConfig{}, 7);
  auto frame_at = [&](std::size_t k) {
    opf::MeasurementFrame f;
    f.frame = static_cast<std::int64_t>(k);
    for (std::size_t i = 0; i < objects; ++i) {
      const double t = static_cast<double>(k) / filter.frame_rate;
      const double phase = t + static_cast<double>(i);
      f.entries.push_back(
          {initial[i].id,
           opf::Pose6DoF(Eigen::Vector3d(0.1 * std::cos(phase), 0.1 * std::sin(phase), 0.0),
                         Eigen::Vector3d(0.0, 0.0, phase))});
    }
    return f;
  };
  tracker.step(frame_at(0));
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 1; k <= frames; ++k) tracker.step(frame_at(k));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double fps = static_cast<double>(frames) / seconds;
  std::printf("objects=%zu particles=%zu+%zu threads=%d frames=%zu: %.1f frames/s\n", objects,
              particles, particles, omp_get_max_threads(), frames, fps);
  if (fps < 100.0) {
    std::printf("warning: below the 100 frames/s real-time target on this machine\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object permanence filter experiments"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string svg;
  auto* run = app.add_subcommand("run", "run one experiment and write the CSV log");
  add_common(run, run_opts, true);
  run->add_option("--svg", svg, "also write an SVG chart of error and trace");

  CommonOptions cmp_opts;
  std::size_t seeds = 5;
  bool check = false;
  auto* compare = app.add_subcommand("compare", "multi-seed PF vs OPF comparison");
  add_common(compare, cmp_opts, false);
  compare->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
  compare->add_flag("--check", check, "exit 3 unless OPF <= 0.5 x PF on both metrics");

  std::string dump;
  auto* scenarios = app.add_subcommand("scenarios", "list builtin scenarios");
  scenarios->add_option("--dump", dump, "print a builtin scenario as JSON");

  std::string file;
  auto* validate = app.add_subcommand("validate", "schema-check a scenario file");
  validate->add_option("file", file, "scenario JSON")->required();

  std::size_t bench_objects = 4;
  std::size_t bench_particles = 5000;
  std::size_t bench_frames = 200;
  int bench_threads = 1;
  auto* bench = app.add_subcommand("bench", "measure tracker throughput");
  bench->add_option("--objects", bench_objects)->capture_default_str();
  bench->add_option("--particles", bench_particles)->capture_default_str();
  bench->add_option("--frames", bench_frames)->capture_default_str();
  bench->add_option("--threads", bench_threads, "OpenMP threads (0 = runtime default)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, svg);
    if (*compare) return cmd_compare(cmp_opts, seeds, check);
    if (*scenarios) return cmd_scenarios(dump);
    if (*validate) return cmd_validate(file);
    if (*bench) return cmd_bench(bench_objects, bench_particles, bench_frames, bench_threads);
  } catch (const opf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code() == opf::ErrorCode::InvalidConfig ? kExitConfig : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

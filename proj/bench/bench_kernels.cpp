// Serial reference kernels vs their OpenMP counterparts, plus one full
// tracker step. Thread count follows OMP_NUM_THREADS.

#include "opf/kernels.hpp"
#include "opf/tracker.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace opf;
namespace k = opf::kernels;

struct Fixture {
  explicit Fixture(std::size_t n) : particles(n), weights(n, 1.0 / n), loglik(n), index(n) {
    const RandomStream rng(7);
    for (std::size_t i = 0; i < n; ++i) {
      particles[i] = 0.1 * rng.normal3(i);
      weights[i] = 0.5 + rng.uniform(3 * n + i);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    for (double& w : weights) w /= total;
    for (std::size_t i = 0; i < n; ++i) loglik[i] = -0.5 * particles[i].squaredNorm() / 0.01;
  }
  std::vector<Eigen::Vector3d> particles;
  std::vector<double> weights;
  std::vector<double> loglik;
  std::vector<std::size_t> index;
};

const Eigen::Matrix3d kSqrt = 0.01 * Eigen::Matrix3d::Identity();
const Eigen::Matrix3d kInfo = 1.0 / 0.005 / 0.005 * Eigen::Matrix3d::Identity();

template <bool Parallel>
void BM_Propagate(benchmark::State& state) {
  Fixture f(state.range(0));
  const RandomStream rng(1);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::propagate(f.particles, Eigen::Vector3d::Zero(), kSqrt, rng, true);
    } else {
      k::serial::propagate(f.particles, Eigen::Vector3d::Zero(), kSqrt, rng, true);
    }
    benchmark::DoNotOptimize(f.particles.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_LogLikelihoods(benchmark::State& state) {
  Fixture f(state.range(0));
  const Eigen::Vector3d y(0.01, -0.02, 0.03);
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::log_likelihoods(f.particles, y, kInfo, true, f.loglik);
    } else {
      k::serial::log_likelihoods(f.particles, y, kInfo, true, f.loglik);
    }
    benchmark::DoNotOptimize(f.loglik.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Reweight(benchmark::State& state) {
  Fixture f(state.range(0));
  const std::vector<double> start = f.weights;
  for (auto _ : state) {
    f.weights = start;
    const bool ok = Parallel ? k::parallel::reweight(f.weights, f.loglik)
                             : k::serial::reweight(f.weights, f.loglik);
    benchmark::DoNotOptimize(ok);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_CircularMoments(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) {
    const k::Moments m = Parallel ? k::parallel::circular_moments(f.particles, f.weights)
                                  : k::serial::circular_moments(f.particles, f.weights);
    benchmark::DoNotOptimize(m.mean.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_SystematicSelect(benchmark::State& state) {
  Fixture f(state.range(0));
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::parallel::systematic_select(f.weights, 0.37 / f.weights.size(), f.index);
    } else {
      k::serial::systematic_select(f.weights, 0.37 / f.weights.size(), f.index);
    }
    benchmark::DoNotOptimize(f.index.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrackerStep(benchmark::State& state) {
  std::vector<Tracker::Initial> init;
  for (int i = 0; i < 4; ++i) {
    init.push_back({"obj" + std::to_string(i), Pose6DoF({0.2 * i, 0, 0}, {0, 0, 0})});
  }
  Tracker t(init, FilterKind::ObjectPermanence, FilterConfig{}, OpConfig{}, 3);
  std::int64_t frame = 0;
  for (auto _ : state) {
    MeasurementFrame f;
    f.frame = frame;
    for (int i = 0; i < 4; ++i) {
      f.entries.push_back({init[i].id, Pose6DoF({0.2 * i + 0.001 * frame, 0, 0}, {0, 0, 0})});
    }
    ++frame;
    benchmark::DoNotOptimize(t.step(f));
  }
  state.counters["fps"] = benchmark::Counter(static_cast<double>(state.iterations()),
                                             benchmark::Counter::kIsRate);
}

#define OPF_PAIR(name)                                                         \
  BENCHMARK(name<false>)->Name(#name "/serial")->Arg(5000)->Arg(50000);        \
  BENCHMARK(name<true>)->Name(#name "/parallel")->Arg(5000)->Arg(50000)

OPF_PAIR(BM_Propagate);
OPF_PAIR(BM_LogLikelihoods);
OPF_PAIR(BM_Reweight);
OPF_PAIR(BM_CircularMoments);
OPF_PAIR(BM_SystematicSelect);
BENCHMARK(BM_TrackerStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include "opf/kernels.hpp"

#include "opf/pose_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace opf::kernels {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline Eigen::Vector3d innovation(const Eigen::Vector3d& y, const Eigen::Vector3d& x, bool wrap) {
  return wrap ? angle_diff(y, x) : Eigen::Vector3d(y - x);
}

inline Eigen::Vector3d advance(const Eigen::Vector3d& x, const Eigen::Vector3d& delta,
                               const Eigen::Matrix3d& noise_sqrt, const RandomStream& rng,
                               std::size_t i, bool wrap) {
  Eigen::Vector3d out = x + delta + noise_sqrt * rng.normal3(i);
  return wrap ? wrap_angles(out) : out;
}

inline std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

// Evaluates `partial(begin, end)` on fixed blocks in parallel and folds the
// partials left to right.
template <typename T, typename Partial, typename Combine>
T blocked_reduce(std::size_t n, T init, Partial partial, Combine combine) {
  const std::size_t blocks = block_count(n);
  std::vector<T> partials(blocks, init);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    partials[b] = partial(begin, std::min(n, begin + kBlock));
  }
  T acc = init;
  for (const T& p : partials) acc = combine(acc, p);
  return acc;
}

struct CircularSums {
  Eigen::Vector3d sin = Eigen::Vector3d::Zero();
  Eigen::Vector3d cos = Eigen::Vector3d::Zero();
};

Eigen::Vector3d circular_mean(const CircularSums& s) {
  return {std::atan2(s.sin.x(), s.cos.x()), std::atan2(s.sin.y(), s.cos.y()),
          std::atan2(s.sin.z(), s.cos.z())};
}

}  // namespace

// ---------------------------------------------------------------------------
// serial reference

namespace serial {

void propagate(std::span<Eigen::Vector3d> particles, const Eigen::Vector3d& delta,
               const Eigen::Matrix3d& noise_sqrt, const RandomStream& rng, bool wrap) {
  for (std::size_t i = 0; i < particles.size(); ++i) {
    particles[i] = advance(particles[i], delta, noise_sqrt, rng, i, wrap);
  }
}

void log_likelihoods(std::span<const Eigen::Vector3d> particles, const Eigen::Vector3d& y,
                     const Eigen::Matrix3d& info, bool wrap, std::span<double> out) {
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Eigen::Vector3d nu = innovation(y, particles[i], wrap);
    out[i] = -0.5 * nu.dot(info * nu);
  }
}

bool reweight(std::span<double> weights, std::span<const double> loglik) {
  std::vector<double> post(weights.size());
  double peak = kNegInf;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    post[i] = weights[i] > 0.0 ? std::log(weights[i]) + loglik[i] : kNegInf;
    if (post[i] > peak) peak = post[i];
  }
  if (!std::isfinite(peak)) return false;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    post[i] = std::exp(post[i] - peak);
    total += post[i];
  }
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = post[i] / total;
  return true;
}

double sum_squares(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return s;
}

Moments weighted_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights) {
  Moments m;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    m.mean += weights[i] * particles[i];
    total += weights[i];
  }
  m.mean /= total;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Eigen::Vector3d d = particles[i] - m.mean;
    m.cov += weights[i] * d * d.transpose();
  }
  m.cov /= total;
  return m;
}

Moments circular_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights) {
  CircularSums s;
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    s.sin += weights[i] * particles[i].array().sin().matrix();
    s.cos += weights[i] * particles[i].array().cos().matrix();
    total += weights[i];
  }
  Moments m;
  m.mean = circular_mean(s);
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const Eigen::Vector3d d = angle_diff(particles[i], m.mean);
    m.cov += weights[i] * d * d.transpose();
  }
  m.cov /= total;
  return m;
}

void systematic_select(std::span<const double> weights, double offset,
                       std::span<std::size_t> out) {
  const std::size_t n = weights.size();
  const double step = 1.0 / static_cast<double>(out.size());
  std::size_t j = 0;
  double cumulative = weights[0];
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double position = offset + static_cast<double>(i) * step;
    while (position >= cumulative && j + 1 < n) cumulative += weights[++j];
    out[i] = j;
  }
}

}  // namespace serial

// ---------------------------------------------------------------------------
// OpenMP

namespace parallel {

void propagate(std::span<Eigen::Vector3d> particles, const Eigen::Vector3d& delta,
               const Eigen::Matrix3d& noise_sqrt, const RandomStream& rng, bool wrap) {
  const auto n = static_cast<std::ptrdiff_t>(particles.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    particles[i] = advance(particles[i], delta, noise_sqrt, rng, static_cast<std::size_t>(i), wrap);
  }
}

void log_likelihoods(std::span<const Eigen::Vector3d> particles, const Eigen::Vector3d& y,
                     const Eigen::Matrix3d& info, bool wrap, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(particles.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Eigen::Vector3d nu = innovation(y, particles[i], wrap);
    out[i] = -0.5 * nu.dot(info * nu);
  }
}

bool reweight(std::span<double> weights, std::span<const double> loglik) {
  const std::size_t n = weights.size();
  std::vector<double> post(n);
  const double peak = blocked_reduce(
      n, kNegInf,
      [&](std::size_t b, std::size_t e) {
        double local = kNegInf;
        for (std::size_t i = b; i < e; ++i) {
          post[i] = weights[i] > 0.0 ? std::log(weights[i]) + loglik[i] : kNegInf;
          local = std::max(local, post[i]);
        }
        return local;
      },
      [](double a, double b) { return std::max(a, b); });
  if (!std::isfinite(peak)) return false;
  const double total = blocked_reduce(
      n, 0.0,
      [&](std::size_t b, std::size_t e) {
        double local = 0.0;
        for (std::size_t i = b; i < e; ++i) {
          post[i] = std::exp(post[i] - peak);
          local += post[i];
        }
        return local;
      },
      [](double a, double b) { return a + b; });
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) weights[i] = post[i] / total;
  return true;
}

double sum_squares(std::span<const double> weights) {
  return blocked_reduce(
      weights.size(), 0.0,
      [&](std::size_t b, std::size_t e) {
        double local = 0.0;
        for (std::size_t i = b; i < e; ++i) local += weights[i] * weights[i];
        return local;
      },
      [](double a, double b) { return a + b; });
}

Moments weighted_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights) {
  using Acc = Eigen::Vector4d;  // (sum w x, sum w)
  const Acc first = blocked_reduce(
      particles.size(), Acc(Acc::Zero()),
      [&](std::size_t b, std::size_t e) {
        Acc local = Acc::Zero();
        for (std::size_t i = b; i < e; ++i) {
          local.head<3>() += weights[i] * particles[i];
          local[3] += weights[i];
        }
        return local;
      },
      [](const Acc& a, const Acc& b) { return Acc(a + b); });
  Moments m;
  m.mean = first.head<3>() / first[3];
  m.cov = blocked_reduce(
              particles.size(), Eigen::Matrix3d(Eigen::Matrix3d::Zero()),
              [&](std::size_t b, std::size_t e) {
                Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
                for (std::size_t i = b; i < e; ++i) {
                  const Eigen::Vector3d d = particles[i] - m.mean;
                  local += weights[i] * d * d.transpose();
                }
                return local;
              },
              [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
                return Eigen::Matrix3d(a + b);
              }) /
          first[3];
  return m;
}

Moments circular_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights) {
  struct Acc {
    CircularSums s;
    double total = 0.0;
  };
  const Acc sums = blocked_reduce(
      particles.size(), Acc{},
      [&](std::size_t b, std::size_t e) {
        Acc local;
        for (std::size_t i = b; i < e; ++i) {
          local.s.sin += weights[i] * particles[i].array().sin().matrix();
          local.s.cos += weights[i] * particles[i].array().cos().matrix();
          local.total += weights[i];
        }
        return local;
      },
      [](const Acc& a, const Acc& b) {
        Acc c;
        c.s.sin = a.s.sin + b.s.sin;
        c.s.cos = a.s.cos + b.s.cos;
        c.total = a.total + b.total;
        return c;
      });
  Moments m;
  m.mean = circular_mean(sums.s);
  m.cov = blocked_reduce(
              particles.size(), Eigen::Matrix3d(Eigen::Matrix3d::Zero()),
              [&](std::size_t b, std::size_t e) {
                Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
                for (std::size_t i = b; i < e; ++i) {
                  const Eigen::Vector3d d = angle_diff(particles[i], m.mean);
                  local += weights[i] * d * d.transpose();
                }
                return local;
              },
              [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
                return Eigen::Matrix3d(a + b);
              }) /
          sums.total;
  return m;
}

void systematic_select(std::span<const double> weights, double offset,
                       std::span<std::size_t> out) {
  const std::size_t n = weights.size();
  const std::size_t blocks = block_count(n);

  // Two-pass blocked prefix sum.
  std::vector<double> cumulative(n);
  std::vector<double> block_total(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(n, begin + kBlock);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      acc += weights[i];
      cumulative[i] = acc;
    }
    block_total[b] = acc;
  }
  std::vector<double> block_offset(blocks, 0.0);
  for (std::size_t b = 1; b < blocks; ++b) block_offset[b] = block_offset[b - 1] + block_total[b - 1];
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 1; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(n, begin + kBlock);
    for (std::size_t i = begin; i < end; ++i) cumulative[i] += block_offset[b];
  }

  // Each output block locates its first index by bisection, then walks.
  const double step = 1.0 / static_cast<double>(out.size());
  const std::size_t m = out.size();
  const auto out_blocks = static_cast<std::ptrdiff_t>(block_count(m));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < out_blocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(m, begin + kBlock);
    const double first = offset + static_cast<double>(begin) * step;
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), first) - cumulative.begin());
    for (std::size_t i = begin; i < end; ++i) {
      const double position = offset + static_cast<double>(i) * step;
      while (j < n && cumulative[j] <= position) ++j;
      out[i] = std::min(j, n - 1);
    }
  }
}

}  // namespace parallel

}  // namespace opf::kernels

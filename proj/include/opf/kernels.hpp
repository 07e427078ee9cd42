#pragma once

// Data-parallel particle kernels.
//
// `serial` holds the plain single-loop reference versions kept for tests;
// `parallel` holds the OpenMP versions the filter runs. Parallel reductions
// are evaluated over fixed-size blocks and combined in block order, so the
// result does not depend on the thread count.

#include "opf/random.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>

namespace opf::kernels {

inline constexpr std::size_t kBlock = 2048;

struct Moments {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

namespace serial {

/// x_i <- x_i + delta + noise_sqrt * z_i with z_i ~ N(0, I) from rng slot i.
void propagate(std::span<Eigen::Vector3d> particles, const Eigen::Vector3d& delta,
               const Eigen::Matrix3d& noise_sqrt, const RandomStream& rng, bool wrap);

/// out_i = -0.5 * nu^T info nu with nu = y - x_i, wrapped per component if `wrap`.
void log_likelihoods(std::span<const Eigen::Vector3d> particles, const Eigen::Vector3d& y,
                     const Eigen::Matrix3d& info, bool wrap, std::span<double> out);

/// w_i <- w_i * exp(loglik_i), max-subtracted and renormalized. Returns false
/// (weights untouched) when no particle keeps finite posterior mass.
bool reweight(std::span<double> weights, std::span<const double> loglik);

double sum_squares(std::span<const double> weights);

Moments weighted_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights);

/// Per-component circular mean; covariance of the wrapped deviations from it.
Moments circular_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights);

/// out_i = first j with cumsum(w)[j] > offset + i/n (clamped to n-1).
void systematic_select(std::span<const double> weights, double offset,
                       std::span<std::size_t> out);

}  // namespace serial

namespace parallel {

void propagate(std::span<Eigen::Vector3d> particles, const Eigen::Vector3d& delta,
               const Eigen::Matrix3d& noise_sqrt, const RandomStream& rng, bool wrap);
void log_likelihoods(std::span<const Eigen::Vector3d> particles, const Eigen::Vector3d& y,
                     const Eigen::Matrix3d& info, bool wrap, std::span<double> out);
bool reweight(std::span<double> weights, std::span<const double> loglik);
double sum_squares(std::span<const double> weights);
Moments weighted_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights);
Moments circular_moments(std::span<const Eigen::Vector3d> particles,
                         std::span<const double> weights);
void systematic_select(std::span<const double> weights, double offset,
                       std::span<std::size_t> out);

}  // namespace parallel

}  // namespace opf::kernels

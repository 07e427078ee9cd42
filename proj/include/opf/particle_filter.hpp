#pragma once

#include "opf/pose_math.hpp"
#include "opf/random.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace opf {

/// Weighted particles over one three-dimensional portion of the state.
struct ParticleSet {
  std::vector<Eigen::Vector3d> particles;
  std::vector<double> weights;

  std::size_t size() const { return particles.size(); }
};

/// Translation (meters) and rotation (Euler radians) portions of one object.
struct ParticlePair {
  ParticleSet translation;
  ParticleSet rotation;
};

/// Process covariance R and measurement covariance Q of one portion.
struct PortionNoise {
  Eigen::Matrix3d process = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d measurement = Eigen::Matrix3d::Identity();
};

struct NoiseModel {
  PortionNoise translation;
  PortionNoise rotation;

  const PortionNoise& portion(Portion p) const {
    return p == Portion::Translation ? translation : rotation;
  }

  /// trace(Q) over both portions.
  double measurement_trace() const {
    return translation.measurement.trace() + rotation.measurement.trace();
  }

  /// Isotropic model: R = process_std^2 I and Q = meas_std^2 I per portion.
  static NoiseModel isotropic(double process_std_t, double process_std_r, double meas_std_t,
                              double meas_std_r);
};

struct PoseEstimate {
  Pose6DoF pose;
  Eigen::Matrix<double, 6, 6> covariance = Eigen::Matrix<double, 6, 6>::Zero();
};

/// Gaussian-sampled particles around `initial` with uniform weights 1/n.
ParticlePair init_particles(const Pose6DoF& initial, std::size_t n, double spread_t,
                            double spread_r, const RandomStream& rng);

/// Symmetric square root of a PSD matrix. Throws InvalidConfig when `cov` is
/// not symmetric positive semi-definite.
Eigen::Matrix3d psd_sqrt(const Eigen::Matrix3d& cov);

/// x_i <- x_i + motion_delta + eps_i, eps_i ~ N(0, R). Weights are unchanged.
/// Rotation particles are re-wrapped to (-pi, pi].
ParticleSet predict(ParticleSet set, const Eigen::Vector3d& motion_delta,
                    const Eigen::Matrix3d& process_cov, Portion portion,
                    const RandomStream& rng);

/// (2 pi)^(-3/2) det(Q)^(-1/2) exp(-0.5 nu^T Q^-1 nu). Throws
/// NumericalSingularity when Q is not strictly positive definite.
double gaussian_likelihood(const Eigen::Vector3d& innovation, const Eigen::Matrix3d& cov);

/// w_i <- eta * w_i * N(y - x_i; 0, Q) with identity measurement function.
/// Rotation innovations are wrapped per component. Throws DegenerateUpdate
/// when every particle loses its posterior mass.
ParticleSet update_weights(ParticleSet set, const Eigen::Vector3d& measurement,
                           const Eigen::Matrix3d& effective_cov, Portion portion);

/// 1 / sum w_i^2
double effective_sample_size(const ParticleSet& set);

/// Systematic resampling: one offset u ~ U[0, 1/n), particles picked at
/// cumulative-weight positions u + i/n; output weights are 1/n.
ParticleSet resample(const ParticleSet& set, const RandomStream& rng);

/// Weighted mean translation, per-component circular mean rotation, and a
/// block-diagonal 6x6 covariance.
PoseEstimate estimate(const ParticlePair& pair);

}  // namespace opf

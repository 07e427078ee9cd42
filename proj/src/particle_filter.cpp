#include "opf/particle_filter.hpp"

#include "opf/error.hpp"
#include "opf/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace opf {

NoiseModel NoiseModel::isotropic(double process_std_t, double process_std_r, double meas_std_t,
                                 double meas_std_r) {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  NoiseModel m;
  m.translation = {process_std_t * process_std_t * id, meas_std_t * meas_std_t * id};
  m.rotation = {process_std_r * process_std_r * id, meas_std_r * meas_std_r * id};
  return m;
}

ParticlePair init_particles(const Pose6DoF& initial, std::size_t n, double spread_t,
                            double spread_r, const RandomStream& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "particle count must be >= 1");
  if (!(spread_t >= 0.0) || !(spread_r >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "initial spread must be >= 0");
  }
  const double w = 1.0 / static_cast<double>(n);
  auto make = [&](const Eigen::Vector3d& center, double spread, bool wrap, std::uint64_t tag) {
    ParticleSet set;
    set.particles.assign(n, center);
    set.weights.assign(n, w);
    if (spread > 0.0) {
      kernels::parallel::propagate(set.particles, Eigen::Vector3d::Zero(),
                                   spread * Eigen::Matrix3d::Identity(), rng.derive(tag), wrap);
    }
    return set;
  };
  return {make(initial.translation(), spread_t, false, 0),
          make(initial.euler(), spread_r, true, 1)};
}

Eigen::Matrix3d psd_sqrt(const Eigen::Matrix3d& cov) {
  if (!cov.allFinite()) throw Error(ErrorCode::InvalidConfig, "covariance must be finite");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(ErrorCode::InvalidConfig, "covariance must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d values = eig.eigenvalues();
  if (values.minCoeff() < -1e-12 * scale) {
    throw Error(ErrorCode::InvalidConfig, "covariance must be positive semi-definite");
  }
  const Eigen::Vector3d roots = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

ParticleSet predict(ParticleSet set, const Eigen::Vector3d& motion_delta,
                    const Eigen::Matrix3d& process_cov, Portion portion,
                    const RandomStream& rng) {
  const Eigen::Matrix3d root = psd_sqrt(process_cov);
  kernels::parallel::propagate(set.particles, motion_delta, root, rng,
                               portion == Portion::Rotation);
  return set;
}

namespace {

Eigen::Matrix3d information_matrix(const Eigen::Matrix3d& cov, double* det_out = nullptr) {
  const Eigen::LLT<Eigen::Matrix3d> llt(cov);
  const double det = cov.determinant();
  if (llt.info() != Eigen::Success || !(det > 0.0) || !std::isfinite(det)) {
    throw Error(ErrorCode::NumericalSingularity, "measurement covariance is not positive definite");
  }
  if (det_out) *det_out = det;
  return llt.solve(Eigen::Matrix3d::Identity());
}

}  // namespace

double gaussian_likelihood(const Eigen::Vector3d& innovation, const Eigen::Matrix3d& cov) {
  double det = 0.0;
  const Eigen::Matrix3d info = information_matrix(cov, &det);
  const double norm = std::pow(2.0 * std::numbers::pi, -1.5) / std::sqrt(det);
  return norm * std::exp(-0.5 * innovation.dot(info * innovation));
}

ParticleSet update_weights(ParticleSet set, const Eigen::Vector3d& measurement,
                           const Eigen::Matrix3d& effective_cov, Portion portion) {
  if (!measurement.allFinite()) throw Error(ErrorCode::InvalidInput, "measurement must be finite");
  const Eigen::Matrix3d info = information_matrix(effective_cov);
  std::vector<double> loglik(set.size());
  kernels::parallel::log_likelihoods(set.particles, measurement, info,
                                     portion == Portion::Rotation, loglik);
  if (!kernels::parallel::reweight(set.weights, loglik)) {
    throw Error(ErrorCode::DegenerateUpdate, "all particle likelihoods vanished");
  }
  return set;
}

double effective_sample_size(const ParticleSet& set) {
  return 1.0 / kernels::parallel::sum_squares(set.weights);
}

ParticleSet resample(const ParticleSet& set, const RandomStream& rng) {
  const std::size_t n = set.size();
  std::vector<std::size_t> picks(n);
  const double offset = rng.uniform(0) / static_cast<double>(n);
  kernels::parallel::systematic_select(set.weights, offset, picks);
  ParticleSet out;
  out.particles.resize(n);
  out.weights.assign(n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out.particles[i] = set.particles[picks[i]];
  return out;
}

PoseEstimate estimate(const ParticlePair& pair) {
  const auto t = kernels::parallel::weighted_moments(pair.translation.particles,
                                                     pair.translation.weights);
  const auto r = kernels::parallel::circular_moments(pair.rotation.particles,
                                                     pair.rotation.weights);
  PoseEstimate e;
  e.pose = Pose6DoF(t.mean, r.mean);
  e.covariance.topLeftCorner<3, 3>() = t.cov;
  e.covariance.bottomRightCorner<3, 3>() = r.cov;
  return e;
}

}  // namespace opf

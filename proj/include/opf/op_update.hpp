#pragma once

// Building blocks of the object permanence update: motion classification,
// first-order motion fitting, Gaussian Bhattacharyya occluder selection and
// covariance inflation. The per-frame orchestration lives in tracker.hpp.

#include "opf/pose_math.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace opf {

struct OpConfig {
  std::size_t history = 50;     ///< H, frames kept for motion analysis
  double delta_t = 0.01;        ///< translation static threshold (m)
  double delta_r = 0.5;         ///< rotation static threshold (rad)
  double eps_occ = 0.01;        ///< Bhattacharyya gap separating single/multiple occluders
  double kappa = 1.03;          ///< covariance growth base, alpha = kappa^v
  bool offset_preserving = false;  ///< keep the onset offset to the occluder

  /// Throws InvalidConfig unless H >= 2, thresholds > 0 and kappa > 1.
  void validate() const;
};

enum class MotionClass { Static, Moving };

/// Static iff the max pairwise translation displacement is <= delta_t and the
/// max pairwise rotation displacement is <= delta_r over the buffer; fewer
/// than two entries count as Static.
MotionClass classify_motion(const TrajectoryBuffer& history, const OpConfig& cfg);

/// Frozen first-order model poly(t) = slope * t + intercept over
/// (x, y, z, omega), where omega is the rotation angle about a fixed axis.
struct MotionModel {
  Eigen::Vector4d slope = Eigen::Vector4d::Zero();
  Eigen::Vector4d intercept = Eigen::Vector4d::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  std::int64_t fit_frame = 0;  ///< last frame of the fitted window

  Eigen::Vector4d operator()(double t) const { return slope * t + intercept; }
};

/// Picks the fixed rotation axis for fitting: the axis of the newest pose, or
/// of the largest-angle pose in the window when the newest is near identity,
/// else +z.
Eigen::Vector3d fit_axis(const TrajectoryBuffer& history);

/// Least-squares line through the buffer over frame index. Rotation enters as
/// the (unwrapped) twist angle about `fit_axis`. Throws InsufficientHistory
/// for fewer than two entries.
MotionModel fit_motion_model(const TrajectoryBuffer& history);

/// Evaluates the frozen model at frame k.
Pose6DoF predict_virtual_measurement(const MotionModel& model, std::int64_t k);

/// Closed-form Bhattacharyya distance between N(mu1, s1) and N(mu2, s2).
/// Throws NumericalSingularity for covariances that are not positive definite.
double bhattacharyya_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                              const Eigen::VectorXd& mu2, const Eigen::MatrixXd& s2);

struct OccluderChoice {
  std::size_t first = 0;                ///< smallest distance
  std::optional<std::size_t> second;    ///< set when the choice is ambiguous

  bool multiple() const { return second.has_value(); }
};

/// Applies the single/multiple rule to candidate distances (index = candidate).
/// Single when the gap between the two smallest exceeds eps_occ; a single
/// candidate is always Single. Throws NoCandidate for an empty list.
OccluderChoice select_occluder(std::span<const double> distances, double eps_occ);

struct TranslationBelief {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Identity();
};

/// Floors a covariance at 1e-8 I so the Bhattacharyya distance stays defined.
Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& cov);

/// Computes D_B from object `occluded` to every other belief and selects the
/// occluder among them. Returned indices refer to `beliefs`.
OccluderChoice select_occluder(std::size_t occluded, std::span<const TranslationBelief> beliefs,
                               const OpConfig& cfg);

/// alpha = kappa^v
double uncertainty_scale(double velocity, double kappa);

/// Speed (m/s) from the last two history entries; 0 with fewer entries.
double trajectory_speed(const TrajectoryBuffer& history, double frame_rate);

}  // namespace opf

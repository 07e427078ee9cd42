#include "opf/op_update.hpp"

#include "opf/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace opf {

void OpConfig::validate() const {
  if (history < 2) throw Error(ErrorCode::InvalidConfig, "H must be >= 2");
  if (!(delta_t > 0.0) || !(delta_r > 0.0) || !(eps_occ > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "thresholds must be > 0");
  }
  if (!(kappa > 1.0)) throw Error(ErrorCode::InvalidConfig, "kappa must be > 1");
}

MotionClass classify_motion(const TrajectoryBuffer& history, const OpConfig& cfg) {
  if (history.size() < 2) return MotionClass::Static;
  const bool translation_still =
      max_pairwise_displacement(history, Portion::Translation) <= cfg.delta_t;
  const bool rotation_still = max_pairwise_displacement(history, Portion::Rotation) <= cfg.delta_r;
  return translation_still && rotation_still ? MotionClass::Static : MotionClass::Moving;
}

Eigen::Vector3d fit_axis(const TrajectoryBuffer& history) {
  constexpr double kTiny = 1e-6;
  const AxisAngle newest = euler_to_axis_angle(history.back().pose.euler());
  if (newest.angle >= kTiny) return newest.axis;
  AxisAngle widest;
  for (const auto& entry : history) {
    const AxisAngle aa = euler_to_axis_angle(entry.pose.euler());
    if (aa.angle > widest.angle) widest = aa;
  }
  return widest.angle >= kTiny ? widest.axis : Eigen::Vector3d::UnitZ();
}

MotionModel fit_motion_model(const TrajectoryBuffer& history) {
  const std::size_t n = history.size();
  if (n < 2) throw Error(ErrorCode::InsufficientHistory, "motion fit needs >= 2 entries");

  MotionModel model;
  model.axis = fit_axis(history);
  model.fit_frame = history.back().frame;

  std::vector<double> t(n);
  std::vector<Eigen::Vector4d> y(n);
  double previous_omega = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = history[i];
    t[i] = static_cast<double>(entry.frame);
    double omega = twist_angle(entry.pose.euler(), model.axis);
    if (i > 0) omega = previous_omega + angle_diff(omega, previous_omega);  // unwrap
    previous_omega = omega;
    const Eigen::Vector3d& p = entry.pose.translation();
    y[i] = {p.x(), p.y(), p.z(), omega};
  }

  // Normal equations on centered time for conditioning.
  const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
  Eigen::Vector4d y_mean = Eigen::Vector4d::Zero();
  for (const auto& v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double stt = 0.0;
  Eigen::Vector4d sty = Eigen::Vector4d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = t[i] - t_mean;
    stt += dt * dt;
    sty += dt * (y[i] - y_mean);
  }
  if (!(stt > 0.0)) throw Error(ErrorCode::InsufficientHistory, "motion fit is rank deficient");
  model.slope = sty / stt;
  model.intercept = y_mean - model.slope * t_mean;
  return model;
}

Pose6DoF predict_virtual_measurement(const MotionModel& model, std::int64_t k) {
  const Eigen::Vector4d y = model(static_cast<double>(k));
  const Eigen::Vector3d euler = axis_angle_to_euler(AxisAngle::canonical(model.axis, y[3]));
  return Pose6DoF(y.head<3>(), euler);
}

double bhattacharyya_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& s1,
                              const Eigen::VectorXd& mu2, const Eigen::MatrixXd& s2) {
  if (mu1.size() != mu2.size() || s1.rows() != mu1.size() || s2.rows() != mu1.size() ||
      s1.cols() != s1.rows() || s2.cols() != s2.rows()) {
    throw Error(ErrorCode::InvalidInput, "Bhattacharyya operands have mismatched dimensions");
  }
  const Eigen::LLT<Eigen::MatrixXd> l1(s1);
  const Eigen::LLT<Eigen::MatrixXd> l2(s2);
  const Eigen::MatrixXd s = 0.5 * (s1 + s2);
  const Eigen::LLT<Eigen::MatrixXd> ls(s);
  if (l1.info() != Eigen::Success || l2.info() != Eigen::Success || ls.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalSingularity, "Bhattacharyya covariance not positive definite");
  }
  auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  };
  const Eigen::VectorXd d = mu1 - mu2;
  const double mahalanobis = d.dot(ls.solve(d));
  return 0.125 * mahalanobis + 0.5 * (log_det(ls) - 0.5 * (log_det(l1) + log_det(l2)));
}

OccluderChoice select_occluder(std::span<const double> distances, double eps_occ) {
  if (distances.empty()) throw Error(ErrorCode::NoCandidate, "no other object can be the occluder");
  std::vector<std::size_t> order(distances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  OccluderChoice choice{order[0], std::nullopt};
  if (order.size() >= 2 && distances[order[1]] - distances[order[0]] <= eps_occ) {
    choice.second = order[1];
  }
  return choice;
}

Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& cov) {
  return cov + 1e-8 * Eigen::Matrix3d::Identity();
}

OccluderChoice select_occluder(std::size_t occluded, std::span<const TranslationBelief> beliefs,
                               const OpConfig& cfg) {
  std::vector<double> distances;
  std::vector<std::size_t> ids;
  const auto& target = beliefs[occluded];
  for (std::size_t j = 0; j < beliefs.size(); ++j) {
    if (j == occluded) continue;
    distances.push_back(bhattacharyya_gaussian(target.mean, floor_covariance(target.cov),
                                               beliefs[j].mean, floor_covariance(beliefs[j].cov)));
    ids.push_back(j);
  }
  OccluderChoice local = select_occluder(distances, cfg.eps_occ);
  OccluderChoice out{ids[local.first], std::nullopt};
  if (local.second) out.second = ids[*local.second];
  return out;
}

double uncertainty_scale(double velocity, double kappa) { return std::pow(kappa, velocity); }

double trajectory_speed(const TrajectoryBuffer& history, double frame_rate) {
  const std::size_t n = history.size();
  if (n < 2) return 0.0;
  const auto& a = history[n - 2];
  const auto& b = history[n - 1];
  const double frames = static_cast<double>(b.frame - a.frame);
  return (b.pose.translation() - a.pose.translation()).norm() / frames * frame_rate;
}

}  // namespace opf

#include "opf/feedback.hpp"

#include "opf/error.hpp"

#include <cmath>

namespace opf {

void FeedbackConfig::validate() const {
  if (!(eps_safe > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps_safe must be > 0");
  if (!(kp_nom > 0.0)) throw Error(ErrorCode::InvalidConfig, "kp_nom must be > 0");
  if (!(kd_nom >= 0.0 && kd_nom <= 1.0)) throw Error(ErrorCode::InvalidConfig, "kd_nom must be in [0, 1]");
  if (!(steepness >= 1.0)) throw Error(ErrorCode::InvalidConfig, "sigmoid steepness must be >= 1");
}

double uncertainty(const Eigen::MatrixXd& effective_cov) {
  if (effective_cov.rows() != effective_cov.cols()) {
    throw Error(ErrorCode::InvalidInput, "uncertainty needs a square matrix");
  }
  return effective_cov.trace();
}

SafetyStatus safety_status(double u, const FeedbackConfig& cfg) {
  return u >= cfg.eps_safe ? SafetyStatus::Alert : SafetyStatus::Normal;
}

std::optional<AlertMonitor::Event> AlertMonitor::observe(double u) {
  const bool alert = safety_status(u, cfg_) == SafetyStatus::Alert;
  if (alert == alerting_) return std::nullopt;
  alerting_ = alert;
  return alert ? Event::Enter : Event::Exit;
}

double sigmoid_gain(double u, double k_nom, double eps_safe, double n) {
  // m^n / (m^n + U^n) rewritten as 1 / (1 + (U/m)^n) to avoid overflow.
  const double ratio = u / (0.5 * eps_safe);
  return k_nom / (1.0 + std::pow(ratio, n));
}

Eigen::Vector3d tracking_command(const RobotPoint& robot, const Eigen::Vector3d& target,
                                 const Eigen::Vector3d& target_velocity, double u,
                                 const FeedbackConfig& cfg) {
  const double kp = sigmoid_gain(u, cfg.kp_nom, cfg.eps_safe, cfg.steepness);
  const double kd = sigmoid_gain(u, cfg.kd_nom, cfg.eps_safe, cfg.steepness);
  return -kp * (robot.position - target) + kd * target_velocity;
}

}  // namespace opf

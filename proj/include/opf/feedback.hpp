#pragma once

#include <Eigen/Core>

#include <optional>

namespace opf {

struct FeedbackConfig {
  double eps_safe = 1.0;  ///< uncertainty threshold, trace units
  double kp_nom = 2.0;    ///< nominal tracking gain (1/s)
  double kd_nom = 1.0;    ///< nominal feedforward gain in [0, 1]
  double steepness = 4.0; ///< sigmoid exponent n >= 1

  void validate() const;
};

/// U = trace of the effective measurement covariance (both portions).
double uncertainty(const Eigen::MatrixXd& effective_cov);

enum class SafetyStatus { Normal, Alert };

/// Alert iff U >= eps_safe (inclusive).
SafetyStatus safety_status(double u, const FeedbackConfig& cfg);

/// Edge-triggered alert latch: reports each crossing of eps_safe once.
class AlertMonitor {
 public:
  enum class Event { Enter, Exit };

  explicit AlertMonitor(FeedbackConfig cfg) : cfg_(cfg) {}

  std::optional<Event> observe(double u);
  bool alerting() const { return alerting_; }

 private:
  FeedbackConfig cfg_;
  bool alerting_ = false;
};

/// k_nom * m^n / (m^n + U^n), m = eps_safe / 2. Decreasing in U, range (0, k_nom].
double sigmoid_gain(double u, double k_nom, double eps_safe, double n);

struct RobotPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

/// Cautious tracking law: xi_r' = -k_p(U) (xi_r - xi_o) + k_d(U) xi_o'.
Eigen::Vector3d tracking_command(const RobotPoint& robot, const Eigen::Vector3d& target,
                                 const Eigen::Vector3d& target_velocity, double u,
                                 const FeedbackConfig& cfg);

}  // namespace opf

#include "opf/pose_math.hpp"

#include "opf/error.hpp"

#include <algorithm>
#include <cmath>

namespace opf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid input";
    case ErrorCode::InvalidConfig: return "invalid config";
    case ErrorCode::NumericalSingularity: return "numerical singularity";
    case ErrorCode::InsufficientHistory: return "insufficient history";
    case ErrorCode::DegenerateUpdate: return "degenerate update";
    case ErrorCode::NoCandidate: return "no occluder candidate";
    case ErrorCode::UnknownObject: return "unknown object";
  }
  return "error";
}

Pose6DoF::Pose6DoF(const Eigen::Vector3d& translation, const Eigen::Vector3d& euler)
    : translation_(translation), euler_(wrap_angles(euler)) {
  if (!translation.allFinite() || !euler.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "pose components must be finite");
  }
}

Pose6DoF Pose6DoF::from_array(const std::array<double, 6>& v) {
  return Pose6DoF({v[0], v[1], v[2]}, {v[3], v[4], v[5]});
}

std::array<double, 6> Pose6DoF::to_array() const {
  return {translation_.x(), translation_.y(), translation_.z(),
          euler_.x(),       euler_.y(),       euler_.z()};
}

AxisAngle AxisAngle::canonical(const Eigen::Vector3d& axis, double angle) {
  if (!axis.allFinite() || !std::isfinite(angle)) {
    throw Error(ErrorCode::InvalidInput, "axis-angle must be finite");
  }
  double a = wrap_angle(angle);
  const double norm = axis.norm();
  if (a == 0.0 || norm == 0.0) return {};
  Eigen::Vector3d unit = axis / norm;
  if (a < 0.0) {
    a = -a;
    unit = -unit;
  }
  return {unit, a};
}

Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& e) {
  return (Eigen::AngleAxisd(e.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(e.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(e.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& r) {
  // r(2,0) = -sin(pitch)
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  const double cp = std::hypot(r(0, 0), r(1, 0));
  double roll = 0.0;
  double yaw = 0.0;
  if (cp > 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    // Gimbal lock: only roll -/+ yaw is observable; put it all into yaw.
    yaw = std::atan2(-r(0, 1), r(1, 1));
  }
  return wrap_angles({roll, pitch, yaw});
}

AxisAngle euler_to_axis_angle(const Eigen::Vector3d& euler) {
  if (!euler.allFinite()) throw Error(ErrorCode::InvalidInput, "euler angles must be finite");
  const Eigen::AngleAxisd aa(euler_to_matrix(euler));
  if (aa.angle() < 1e-15) return {};
  return AxisAngle::canonical(aa.axis(), aa.angle());
}

Eigen::Vector3d axis_angle_to_euler(const AxisAngle& aa) {
  if (!aa.axis.allFinite() || !std::isfinite(aa.angle)) {
    throw Error(ErrorCode::InvalidInput, "axis-angle must be finite");
  }
  if (aa.angle != 0.0 && std::abs(aa.axis.norm() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidInput, "axis must be unit length for a nonzero angle");
  }
  if (aa.angle == 0.0) return Eigen::Vector3d::Zero();
  return matrix_to_euler(Eigen::AngleAxisd(aa.angle, aa.axis).toRotationMatrix());
}

double twist_angle(const Eigen::Vector3d& euler, const Eigen::Vector3d& axis) {
  const Eigen::Quaterniond q(euler_to_matrix(euler));
  const double projection = q.vec().dot(axis.normalized());
  return wrap_angle(2.0 * std::atan2(projection, q.w()));
}

TrajectoryBuffer::TrajectoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 2) throw Error(ErrorCode::InvalidConfig, "trajectory capacity must be >= 2");
}

void TrajectoryBuffer::push(std::int64_t frame, const Pose6DoF& pose) {
  if (!entries_.empty() && frame <= entries_.back().frame) {
    throw Error(ErrorCode::InvalidInput, "trajectory frame indices must increase");
  }
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back({frame, pose});
}

double max_pairwise_displacement(const TrajectoryBuffer& buffer, Portion portion) {
  const std::size_t n = buffer.size();
  if (n < 2) throw Error(ErrorCode::InsufficientHistory, "need at least 2 trajectory entries");
  double best = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double d =
          portion == Portion::Translation
              ? (buffer[p].pose.translation() - buffer[q].pose.translation()).norm()
              : angle_diff(buffer[p].pose.euler(), buffer[q].pose.euler()).norm();
      best = std::max(best, d);
    }
  }
  return best;
}

}  // namespace opf

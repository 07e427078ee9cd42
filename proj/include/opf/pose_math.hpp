#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numbers>

namespace opf {

/// Wraps an angle to the half-open interval (-pi, pi]. Values already in
/// range are returned unchanged (bit for bit).
inline double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  if (angle > -pi && angle <= pi) return angle;
  double wrapped = std::fmod(angle + pi, 2.0 * pi);
  if (wrapped <= 0.0) wrapped += 2.0 * pi;
  return wrapped - pi;
}

/// Component-wise wrap of an Euler triple.
inline Eigen::Vector3d wrap_angles(const Eigen::Vector3d& angles) {
  return {wrap_angle(angles.x()), wrap_angle(angles.y()), wrap_angle(angles.z())};
}

/// Shortest signed difference a - b, wrapped to (-pi, pi].
inline double angle_diff(double a, double b) { return wrap_angle(a - b); }
inline Eigen::Vector3d angle_diff(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return wrap_angles(a - b);
}

/// Object translation (meters) and orientation as Euler angles (radians).
///
/// Euler angles follow the extrinsic X-Y-Z convention: roll (theta) about the
/// fixed x axis, then pitch (phi) about the fixed y axis, then yaw (psi) about
/// the fixed z axis, so R = Rz(psi) * Ry(phi) * Rx(theta). Angles are kept in
/// (-pi, pi]; all components must be finite.
class Pose6DoF {
 public:
  Pose6DoF() : translation_(Eigen::Vector3d::Zero()), euler_(Eigen::Vector3d::Zero()) {}
  Pose6DoF(const Eigen::Vector3d& translation, const Eigen::Vector3d& euler);

  static Pose6DoF from_array(const std::array<double, 6>& values);

  const Eigen::Vector3d& translation() const { return translation_; }
  const Eigen::Vector3d& euler() const { return euler_; }
  std::array<double, 6> to_array() const;

  bool operator==(const Pose6DoF& other) const {
    return translation_ == other.translation_ && euler_ == other.euler_;
  }

 private:
  Eigen::Vector3d translation_;
  Eigen::Vector3d euler_;
};

/// Unit rotation axis and angle in [0, pi]. The identity rotation uses axis +z.
struct AxisAngle {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double angle = 0.0;

  /// Normalizes the axis and folds the angle into [0, pi].
  static AxisAngle canonical(const Eigen::Vector3d& axis, double angle);
};

Eigen::Matrix3d euler_to_matrix(const Eigen::Vector3d& euler);
Eigen::Vector3d matrix_to_euler(const Eigen::Matrix3d& rotation);

AxisAngle euler_to_axis_angle(const Eigen::Vector3d& euler);
Eigen::Vector3d axis_angle_to_euler(const AxisAngle& aa);

/// Signed rotation angle about `axis` contained in the rotation `euler`
/// (the twist part of a swing-twist decomposition), in (-pi, pi].
double twist_angle(const Eigen::Vector3d& euler, const Eigen::Vector3d& axis);

enum class Portion { Translation, Rotation };

/// Ring buffer of the last H (frame index, pose) pairs.
class TrajectoryBuffer {
 public:
  struct Entry {
    std::int64_t frame;
    Pose6DoF pose;
  };

  explicit TrajectoryBuffer(std::size_t capacity = 50);

  /// Appends an entry, evicting the oldest one when full. Frame indices must
  /// be strictly increasing.
  void push(std::int64_t frame, const Pose6DoF& pose);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& back() const { return entries_.back(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

/// Exact max over all pairs (p, q) of ||Tr[p] - Tr[q]||. Rotation differences
/// are wrapped per component. Throws InsufficientHistory for < 2 entries.
double max_pairwise_displacement(const TrajectoryBuffer& buffer, Portion portion);

}  // namespace opf

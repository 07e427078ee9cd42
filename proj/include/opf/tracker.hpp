#pragma once

// Ensemble of K interconnected object permanence filters stepped frame by
// frame. Each tracked object owns a translation and a rotation particle set;
// a missing measurement triggers the object permanence update, which feeds a
// virtual measurement under an inflated covariance alpha * Q.

#include "opf/op_update.hpp"
#include "opf/particle_filter.hpp"
#include "opf/pose_math.hpp"
#include "opf/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace opf {

/// Per-frame set of optional pose measurements keyed by object id. An absent
/// pose means the object was occluded or dropped by the sensor.
struct MeasurementFrame {
  struct Entry {
    std::string id;
    std::optional<Pose6DoF> pose;
  };
  std::int64_t frame = 0;
  std::vector<Entry> entries;
};

enum class FilterKind { Standard, ObjectPermanence };

struct FilterConfig {
  std::size_t particles = 5000;  ///< per portion, per object
  double process_std_t = 0.01;
  double process_std_r = 0.05;
  double meas_std_t = 0.005;
  double meas_std_r = 0.02;
  double init_spread_t = 0.005;
  double init_spread_r = 0.02;
  double frame_rate = 30.0;

  void validate() const;
  NoiseModel noise() const {
    return NoiseModel::isotropic(process_std_t, process_std_r, meas_std_t, meas_std_r);
  }
};

namespace occlusion {
struct Visible {};
/// Follows the measurement of a single occluder.
struct Static {
  std::size_t occluder;
};
/// Extrapolates a motion model frozen at onset.
struct Moving {
  MotionModel model;
};
/// Two occluders within eps_occ: the primary follows `first`, its clone `second`.
struct Ambiguous {
  std::size_t first;
  std::size_t second;
};
/// Fallback when no rule applies: keep feeding the onset pose.
struct Hold {
  Pose6DoF pose;
};
}  // namespace occlusion

using OcclusionState = std::variant<occlusion::Visible, occlusion::Static, occlusion::Moving,
                                    occlusion::Ambiguous, occlusion::Hold>;

struct OcclusionStatus {
  OcclusionState state = occlusion::Visible{};
  std::int64_t occluded_since = -1;
  double scale = 1.0;     ///< cumulative alpha; exactly 1 while visible
  double velocity = 0.0;  ///< v frozen at onset (m/s)
  Pose6DoF offset;        ///< onset pose minus occluder pose (offset-preserving mode)

  bool visible() const { return std::holds_alternative<occlusion::Visible>(state); }
};

struct TrackedObject {
  std::size_t object = 0;   ///< index into Tracker::ids()
  int hypothesis = 0;       ///< 0 = primary, 1 = virtual clone
  ParticlePair particles;
  TrajectoryBuffer history;
  OcclusionStatus status;
  PoseEstimate estimate;

  bool is_virtual_clone() const { return hypothesis != 0; }
};

/// What one hypothesis did during a frame.
struct HypothesisReport {
  std::size_t object = 0;
  int hypothesis = 0;
  PoseEstimate estimate;
  bool measured = false;                     ///< a real measurement was present
  std::optional<Pose6DoF> fed_measurement;   ///< real or virtual y used in the update
  std::optional<std::size_t> occluder;       ///< inferred occluder (static/ambiguous)
  double scale = 1.0;                        ///< alpha applied to Q
  double velocity = 0.0;                     ///< v frozen at occlusion onset; 0 while visible
  double trace_q = 0.0;                      ///< trace of alpha * Q over both portions
  std::vector<std::string> diagnostics;
};

/// Read-only view of every primary object at the start of a frame: the
/// previous-frame beliefs plus this frame's measurements.
struct EnsembleSnapshot {
  struct View {
    TranslationBelief belief;
    Pose6DoF estimate;
    std::optional<Pose6DoF> measurement;
    double speed = 0.0;  ///< m/s from the last two history entries
  };
  std::vector<View> objects;
};

struct OpUpdateResult {
  Pose6DoF measurement;                  ///< virtual measurement for this hypothesis
  double scale = 1.0;                    ///< cumulative alpha after this frame
  std::optional<std::size_t> occluder;
  /// Set on the onset frame of an ambiguous occlusion: the clone's status and
  /// its virtual measurement for this frame.
  struct Clone {
    OcclusionStatus status;
    Pose6DoF measurement;
  };
  std::optional<Clone> clone;
  std::vector<std::string> diagnostics;
};

/// Object permanence update for one hypothesis without a measurement at
/// `frame`. On the first occluded frame it classifies the motion, then either
/// fits the motion model or selects the occluder; every frame it multiplies
/// the cumulative scale by kappa^v and returns the virtual measurement.
OpUpdateResult op_update_step(OcclusionStatus& status, const TrajectoryBuffer& history,
                              std::size_t object, bool is_clone, const EnsembleSnapshot& snap,
                              std::int64_t frame, const OpConfig& cfg, double frame_rate);

class Tracker {
 public:
  struct Initial {
    std::string id;
    Pose6DoF pose;
  };

  Tracker(std::vector<Initial> objects, FilterKind kind, FilterConfig filter, OpConfig op,
          std::uint64_t seed);

  /// Runs one predict/update cycle for every hypothesis. Throws UnknownObject
  /// (and leaves the tracker untouched) when the frame names an unknown id.
  std::vector<HypothesisReport> step(const MeasurementFrame& frame);

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<TrackedObject>& hypotheses() const { return hypotheses_; }
  const NoiseModel& noise() const { return noise_; }
  FilterKind kind() const { return kind_; }
  const FilterConfig& filter_config() const { return filter_; }
  const OpConfig& op_config() const { return op_; }

  /// Number of live hypotheses for object index `object` (1 or 2).
  std::size_t hypothesis_count(std::size_t object) const;

 private:
  std::vector<std::optional<Pose6DoF>> index_measurements(const MeasurementFrame& frame) const;
  EnsembleSnapshot snapshot(const std::vector<std::optional<Pose6DoF>>& measured) const;
  RandomStream stream(const TrackedObject& h, std::int64_t frame, std::uint64_t purpose) const;
  void predict(TrackedObject& h, std::int64_t frame) const;
  void correct(TrackedObject& h, const Pose6DoF& y, double scale,
               HypothesisReport& report) const;
  void finish(TrackedObject& h, std::int64_t frame, HypothesisReport& report) const;

  std::vector<std::string> ids_;
  std::vector<TrackedObject> hypotheses_;
  FilterKind kind_;
  FilterConfig filter_;
  OpConfig op_;
  NoiseModel noise_;
  RandomStream rng_;
};

}  // namespace opf

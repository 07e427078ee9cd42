#include "opf/tracker.hpp"

#include "opf/error.hpp"

#include <algorithm>
#include <cmath>

namespace opf {

namespace {

enum Purpose : std::uint64_t {
  kPredictTranslation = 0,
  kPredictRotation = 1,
  kResampleTranslation = 2,
  kResampleRotation = 3,
  kInit = 4,
};

Pose6DoF pose_difference(const Pose6DoF& a, const Pose6DoF& b) {
  return Pose6DoF(a.translation() - b.translation(), angle_diff(a.euler(), b.euler()));
}

Pose6DoF pose_offset(const Pose6DoF& base, const Pose6DoF& offset) {
  return Pose6DoF(base.translation() + offset.translation(), base.euler() + offset.euler());
}

Pose6DoF occluder_reference(const EnsembleSnapshot& snap, std::size_t j) {
  const auto& view = snap.objects[j];
  return view.measurement ? *view.measurement : view.estimate;
}

// y <- y_j verbatim unless the onset offset is preserved.
Pose6DoF follow(const EnsembleSnapshot& snap, std::size_t j, const OcclusionStatus& status,
                const OpConfig& cfg) {
  const Pose6DoF reference = occluder_reference(snap, j);
  return cfg.offset_preserving ? pose_offset(reference, status.offset) : reference;
}

}  // namespace

void FilterConfig::validate() const {
  if (particles == 0) throw Error(ErrorCode::InvalidConfig, "particle count must be >= 1");
  if (!(process_std_t >= 0.0) || !(process_std_r >= 0.0) || !(init_spread_t >= 0.0) ||
      !(init_spread_r >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "standard deviations must be >= 0");
  }
  if (!(meas_std_t > 0.0) || !(meas_std_r > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "measurement standard deviations must be > 0");
  }
  if (!(frame_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "frame rate must be > 0");
}

OpUpdateResult op_update_step(OcclusionStatus& status, const TrajectoryBuffer& history,
                              std::size_t object, bool is_clone, const EnsembleSnapshot& snap,
                              std::int64_t frame, const OpConfig& cfg, double frame_rate) {
  OpUpdateResult result;
  const auto& self = snap.objects.at(object);

  if (status.visible()) {
    status.occluded_since = frame;
    status.scale = 1.0;
    status.velocity = trajectory_speed(history, frame_rate);
    status.offset = Pose6DoF();
    status.state = occlusion::Hold{self.estimate};

    if (classify_motion(history, cfg) == MotionClass::Moving) {
      try {
        status.state = occlusion::Moving{fit_motion_model(history)};
      } catch (const Error& e) {
        result.diagnostics.emplace_back(e.what());
      }
    } else {
      std::vector<TranslationBelief> beliefs;
      beliefs.reserve(snap.objects.size());
      for (const auto& view : snap.objects) beliefs.push_back(view.belief);
      try {
        const OccluderChoice choice = select_occluder(object, beliefs, cfg);
        status.velocity = snap.objects[choice.first].speed;
        if (cfg.offset_preserving) {
          status.offset = pose_difference(self.estimate, occluder_reference(snap, choice.first));
        }
        if (!choice.multiple()) {
          status.state = occlusion::Static{choice.first};
        } else {
          const std::size_t second = *choice.second;
          status.state = occlusion::Ambiguous{choice.first, second};
          OcclusionStatus clone = status;
          clone.velocity = snap.objects[second].speed;
          if (cfg.offset_preserving) {
            clone.offset = pose_difference(self.estimate, occluder_reference(snap, second));
          }
          clone.scale *= uncertainty_scale(clone.velocity, cfg.kappa);
          result.clone = OpUpdateResult::Clone{clone, follow(snap, second, clone, cfg)};
        }
      } catch (const Error& e) {
        result.diagnostics.emplace_back(e.what());
      }
    }
  }

  status.scale *= uncertainty_scale(status.velocity, cfg.kappa);
  result.scale = status.scale;

  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, occlusion::Moving>) {
          result.measurement = predict_virtual_measurement(s.model, frame);
        } else if constexpr (std::is_same_v<S, occlusion::Static>) {
          result.occluder = s.occluder;
          result.measurement = follow(snap, s.occluder, status, cfg);
        } else if constexpr (std::is_same_v<S, occlusion::Ambiguous>) {
          const std::size_t j = is_clone ? s.second : s.first;
          result.occluder = j;
          result.measurement = follow(snap, j, status, cfg);
        } else if constexpr (std::is_same_v<S, occlusion::Hold>) {
          result.measurement = s.pose;
        } else {
          result.measurement = self.estimate;
        }
      },
      status.state);
  return result;
}

Tracker::Tracker(std::vector<Initial> objects, FilterKind kind, FilterConfig filter, OpConfig op,
                 std::uint64_t seed)
    : kind_(kind), filter_(filter), op_(op), noise_(filter.noise()), rng_(seed) {
  filter_.validate();
  op_.validate();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (std::find(ids_.begin(), ids_.end(), objects[i].id) != ids_.end()) {
      throw Error(ErrorCode::InvalidConfig, "duplicate object id '" + objects[i].id + "'");
    }
    ids_.push_back(objects[i].id);
    TrackedObject h{i, 0, {}, TrajectoryBuffer(op_.history), {}, {}};
    h.particles = init_particles(objects[i].pose, filter_.particles, filter_.init_spread_t,
                                 filter_.init_spread_r, stream(h, 0, kInit));
    h.estimate = opf::estimate(h.particles);
    hypotheses_.push_back(std::move(h));
  }
}

std::size_t Tracker::hypothesis_count(std::size_t object) const {
  return static_cast<std::size_t>(std::count_if(
      hypotheses_.begin(), hypotheses_.end(),
      [&](const TrackedObject& h) { return h.object == object; }));
}

std::vector<std::optional<Pose6DoF>> Tracker::index_measurements(
    const MeasurementFrame& frame) const {
  std::vector<std::optional<Pose6DoF>> out(ids_.size());
  for (const auto& entry : frame.entries) {
    const auto it = std::find(ids_.begin(), ids_.end(), entry.id);
    if (it == ids_.end()) {
      throw Error(ErrorCode::UnknownObject, "frame " + std::to_string(frame.frame) +
                                                " names unknown object '" + entry.id + "'");
    }
    out[static_cast<std::size_t>(it - ids_.begin())] = entry.pose;
  }
  return out;
}

EnsembleSnapshot Tracker::snapshot(const std::vector<std::optional<Pose6DoF>>& measured) const {
  EnsembleSnapshot snap;
  snap.objects.resize(ids_.size());
  for (const auto& h : hypotheses_) {
    if (h.is_virtual_clone()) continue;
    auto& view = snap.objects[h.object];
    view.belief.mean = h.estimate.pose.translation();
    view.belief.cov = h.estimate.covariance.topLeftCorner<3, 3>();
    view.estimate = h.estimate.pose;
    view.measurement = measured[h.object];
    view.speed = trajectory_speed(h.history, filter_.frame_rate);
  }
  return snap;
}

RandomStream Tracker::stream(const TrackedObject& h, std::int64_t frame,
                             std::uint64_t purpose) const {
  return rng_.derive({h.object, static_cast<std::uint64_t>(h.hypothesis),
                      static_cast<std::uint64_t>(frame), purpose});
}

void Tracker::predict(TrackedObject& h, std::int64_t frame) const {
  // Objects are moved by external agents: no control input, motion enters
  // through process noise and (during occlusion) virtual measurements.
  const Eigen::Vector3d no_motion = Eigen::Vector3d::Zero();
  h.particles.translation =
      opf::predict(std::move(h.particles.translation), no_motion, noise_.translation.process,
                   Portion::Translation, stream(h, frame, kPredictTranslation));
  h.particles.rotation =
      opf::predict(std::move(h.particles.rotation), no_motion, noise_.rotation.process,
                   Portion::Rotation, stream(h, frame, kPredictRotation));
}

void Tracker::correct(TrackedObject& h, const Pose6DoF& y, double scale,
                      HypothesisReport& report) const {
  auto update = [&](ParticleSet& set, const Eigen::Vector3d& z, const Eigen::Matrix3d& q,
                    Portion portion) {
    try {
      set = update_weights(std::move(set), z, scale * q, portion);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateUpdate) throw;
      std::fill(set.weights.begin(), set.weights.end(), 1.0 / static_cast<double>(set.size()));
      report.diagnostics.emplace_back(e.what());
    }
  };
  update(h.particles.translation, y.translation(), noise_.translation.measurement,
         Portion::Translation);
  update(h.particles.rotation, y.euler(), noise_.rotation.measurement, Portion::Rotation);
  report.fed_measurement = y;
  report.scale = scale;
}

void Tracker::finish(TrackedObject& h, std::int64_t frame, HypothesisReport& report) const {
  h.estimate = opf::estimate(h.particles);
  h.history.push(frame, h.estimate.pose);
  const double threshold = 0.5 * static_cast<double>(filter_.particles);
  if (effective_sample_size(h.particles.translation) < threshold) {
    h.particles.translation =
        resample(h.particles.translation, stream(h, frame, kResampleTranslation));
  }
  if (effective_sample_size(h.particles.rotation) < threshold) {
    h.particles.rotation = resample(h.particles.rotation, stream(h, frame, kResampleRotation));
  }
  report.estimate = h.estimate;
  report.trace_q = report.scale * noise_.measurement_trace();
}

std::vector<HypothesisReport> Tracker::step(const MeasurementFrame& frame) {
  const auto measured = index_measurements(frame);
  const std::int64_t k = frame.frame;
  const EnsembleSnapshot snap = snapshot(measured);

  // A real measurement resolves any ambiguity: keep the primary hypothesis.
  std::erase_if(hypotheses_, [&](const TrackedObject& h) {
    return h.is_virtual_clone() && measured[h.object].has_value();
  });

  std::vector<TrackedObject> next;
  std::vector<HypothesisReport> reports;
  next.reserve(hypotheses_.size() + 1);
  reports.reserve(hypotheses_.size() + 1);

  for (auto& h : hypotheses_) {
    HypothesisReport report;
    report.object = h.object;
    report.hypothesis = h.hypothesis;
    predict(h, k);

    std::optional<TrackedObject> clone;
    HypothesisReport clone_report;
    if (const auto& y = measured[h.object]) {
      h.status = OcclusionStatus{};
      report.measured = true;
      correct(h, *y, 1.0, report);
    } else if (kind_ == FilterKind::ObjectPermanence) {
      OpUpdateResult op = op_update_step(h.status, h.history, h.object, h.is_virtual_clone(),
                                         snap, k, op_, filter_.frame_rate);
      report.occluder = op.occluder;
      report.velocity = h.status.velocity;
      report.diagnostics = std::move(op.diagnostics);
      if (op.clone && !h.is_virtual_clone()) {
        clone = h;
        clone->hypothesis = 1;
        clone->status = op.clone->status;
        clone_report.object = h.object;
        clone_report.hypothesis = 1;
        clone_report.velocity = clone->status.velocity;
        if (const auto* amb = std::get_if<occlusion::Ambiguous>(&clone->status.state)) {
          clone_report.occluder = amb->second;
        }
        correct(*clone, op.clone->measurement, clone->status.scale, clone_report);
        finish(*clone, k, clone_report);
      }
      correct(h, op.measurement, op.scale, report);
    }
    // Standard PF with a missing measurement: predict only.

    finish(h, k, report);
    next.push_back(std::move(h));
    reports.push_back(std::move(report));
    if (clone) {
      next.push_back(std::move(*clone));
      reports.push_back(std::move(clone_report));
    }
  }
  hypotheses_ = std::move(next);
  return reports;
}

}  // namespace opf

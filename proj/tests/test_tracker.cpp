#include "opf/error.hpp"
#include "opf/tracker.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>

using namespace opf;

namespace {

Pose6DoF at(double x, double y = 0, double z = 0) {
  return Pose6DoF({x, y, z}, Eigen::Vector3d::Zero());
}

FilterConfig small_filter(std::size_t n = 400) {
  FilterConfig f;
  f.particles = n;
  return f;
}

MeasurementFrame frame_of(std::int64_t k, std::vector<std::pair<std::string, std::optional<Pose6DoF>>> e) {
  MeasurementFrame f;
  f.frame = k;
  for (auto& [id, pose] : e) f.entries.push_back({id, pose});
  return f;
}

}  // namespace

TEST(Tracker, RejectsDuplicateIds) {
  EXPECT_THROW(Tracker({{"a", at(0)}, {"a", at(1)}}, FilterKind::ObjectPermanence, small_filter(),
                       OpConfig{}, 1),
               Error);
}

TEST(Tracker, UnknownObjectLeavesStateUntouched) {
  Tracker t({{"a", at(0)}}, FilterKind::ObjectPermanence, small_filter(), OpConfig{}, 1);
  t.step(frame_of(0, {{"a", at(0)}}));
  const auto before = t.hypotheses().front().particles.translation.particles;
  try {
    t.step(frame_of(1, {{"a", at(0)}, {"ghost", at(1)}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownObject);
  }
  EXPECT_EQ(t.hypotheses().front().particles.translation.particles, before);
  EXPECT_EQ(t.hypotheses().front().history.size(), 1u);
}

TEST(Tracker, FullyVisibleRunsMatchStandardFilter) {
  const std::vector<Tracker::Initial> init = {{"a", at(0)}, {"b", at(0.5)}, {"c", at(-0.5)}};
  Tracker pf(init, FilterKind::Standard, small_filter(), OpConfig{}, 9);
  Tracker opf(init, FilterKind::ObjectPermanence, small_filter(), OpConfig{}, 9);
  for (int k = 0; k < 40; ++k) {
    const auto f = frame_of(k, {{"a", at(0.01 * k)}, {"b", at(0.5, 0.01 * k)}, {"c", at(-0.5)}});
    const auto rp = pf.step(f);
    const auto ro = opf.step(f);
    ASSERT_EQ(rp.size(), ro.size());
    for (std::size_t i = 0; i < rp.size(); ++i) {
      EXPECT_EQ(rp[i].estimate.pose, ro[i].estimate.pose);
      EXPECT_EQ(rp[i].trace_q, ro[i].trace_q);
    }
  }
}

TEST(Tracker, StandardFilterOnlyPredictsWithoutMeasurement) {
  Tracker t({{"a", at(0)}}, FilterKind::Standard, small_filter(), OpConfig{}, 3);
  t.step(frame_of(0, {{"a", at(0)}}));
  const auto weights = t.hypotheses().front().particles.translation.weights;
  const auto reports = t.step(frame_of(1, {{"a", std::nullopt}}));
  EXPECT_FALSE(reports.front().fed_measurement.has_value());
  EXPECT_EQ(reports.front().scale, 1.0);
  const auto& after = t.hypotheses().front().particles.translation.weights;
  if (after.size() == weights.size()) {
    // Resampling may have reset the weights; otherwise they are untouched.
    bool uniform = true;
    for (double w : after) uniform &= w == 1.0 / after.size();
    EXPECT_TRUE(uniform || after == weights);
  }
}

TEST(Tracker, ScaleGrowsDuringOcclusionAndResetsOnReturn) {
  // Mover at constant velocity; once hidden, its scale grows by kappa^v per frame.
  Tracker t({{"ball", at(0)}, {"wall", at(1, 1)}}, FilterKind::ObjectPermanence, small_filter(),
            OpConfig{}, 4);
  const double v = 0.005;  // m/frame
  double previous = 1.0;
  std::optional<double> velocity;
  for (int k = 0; k < 90; ++k) {
    const bool hidden = k >= 60 && k < 80;
    const auto reports =
        t.step(frame_of(k, {{"ball", hidden ? std::nullopt : std::optional(at(v * k))},
                            {"wall", at(1, 1)}}));
    const auto& s = t.hypotheses().front().status;
    if (hidden) {
      if (!velocity) velocity = s.velocity;
      EXPECT_EQ(s.velocity, *velocity);
      EXPECT_GE(reports[0].scale, previous);
      if (k > 60) {
        EXPECT_NEAR(reports[0].scale / previous, std::pow(1.03, *velocity), 1e-12);
      }
      EXPECT_TRUE(std::holds_alternative<occlusion::Moving>(s.state));
    } else {
      EXPECT_EQ(reports[0].scale, 1.0);
      EXPECT_TRUE(s.visible());
    }
    previous = reports[0].scale;
  }
  ASSERT_TRUE(velocity);
  EXPECT_NEAR(*velocity, v * 30.0, 0.05);
}

TEST(Tracker, MotionModelIsFrozenForTheEpisode) {
  Tracker t({{"ball", at(0)}, {"wall", at(1, 1)}}, FilterKind::ObjectPermanence, small_filter(),
            OpConfig{}, 5);
  std::optional<MotionModel> onset;
  for (int k = 0; k < 100; ++k) {
    const bool hidden = k >= 60;
    t.step(frame_of(k, {{"ball", hidden ? std::nullopt : std::optional(at(0.004 * k))},
                        {"wall", at(1, 1)}}));
    if (!hidden) continue;
    const auto& m = std::get<occlusion::Moving>(t.hypotheses().front().status.state).model;
    if (!onset) {
      onset = m;
      EXPECT_EQ(m.fit_frame, 59);
    }
    EXPECT_EQ(m.slope, onset->slope);
    EXPECT_EQ(m.intercept, onset->intercept);
    EXPECT_EQ(m.axis, onset->axis);
  }
}

TEST(Tracker, StaticObjectFollowsOccluderVerbatim) {
  Tracker t({{"ball", at(0)}, {"cup", at(0.3)}}, FilterKind::ObjectPermanence, small_filter(),
            OpConfig{}, 6);
  for (int k = 0; k < 100; ++k) {
    const Pose6DoF cup = at(0.3 - 0.01 * std::min(k, 30) + 0.002 * std::max(0, k - 40));
    const bool hidden = k >= 35;
    const auto reports = t.step(
        frame_of(k, {{"ball", hidden ? std::nullopt : std::optional(at(0))}, {"cup", cup}}));
    if (hidden) {
      ASSERT_TRUE(reports[0].fed_measurement);
      EXPECT_EQ(*reports[0].fed_measurement, cup);
      EXPECT_EQ(reports[0].occluder, std::optional<std::size_t>(1));
    }
  }
}

TEST(Tracker, OccludedOccluderFallsBackToItsEstimate) {
  Tracker t({{"ball", at(0)}, {"cup", at(0.02)}}, FilterKind::ObjectPermanence, small_filter(),
            OpConfig{}, 7);
  for (int k = 0; k < 30; ++k) t.step(frame_of(k, {{"ball", at(0)}, {"cup", at(0.02)}}));
  const auto reports = t.step(frame_of(30, {{"ball", std::nullopt}, {"cup", std::nullopt}}));
  ASSERT_TRUE(reports[0].fed_measurement);
  // The cup's previous-frame posterior mean stands in for its measurement.
  EXPECT_LT((reports[0].fed_measurement->translation() - Eigen::Vector3d(0.02, 0, 0)).norm(), 0.005);
}

TEST(Tracker, SingleObjectFallsBackToHold) {
  Tracker t({{"solo", at(0.2)}}, FilterKind::ObjectPermanence, small_filter(), OpConfig{}, 8);
  for (int k = 0; k < 10; ++k) t.step(frame_of(k, {{"solo", at(0.2)}}));
  const auto reports = t.step(frame_of(10, {{"solo", std::nullopt}}));
  EXPECT_FALSE(reports[0].diagnostics.empty());
  EXPECT_TRUE(std::holds_alternative<occlusion::Hold>(t.hypotheses().front().status.state));
  // Hold grows with the object's own (jitter-level) speed.
  const double v = t.hypotheses().front().status.velocity;
  EXPECT_LT(v, 0.05);
  EXPECT_EQ(reports[0].scale, uncertainty_scale(v, 1.03));
}

TEST(Tracker, AmbiguousOccludersSpawnOneCloneUntilReappearance) {
  FilterConfig f = small_filter(200);
  f.process_std_t = 0.0;
  f.process_std_r = 0.0;
  f.init_spread_t = 0.0;
  f.init_spread_r = 0.0;
  const Pose6DoF left = at(0, 0.05), right = at(0, -0.05);
  Tracker t({{"ball", at(0)}, {"left", left}, {"right", right}}, FilterKind::ObjectPermanence, f,
            OpConfig{}, 9);
  int spawned = 0;
  for (int k = 0; k < 40; ++k) {
    const bool hidden = k >= 10 && k < 30;
    const std::size_t before = t.hypothesis_count(0);
    const auto reports = t.step(frame_of(
        k, {{"ball", hidden ? std::nullopt : std::optional(at(0))}, {"left", left}, {"right", right}}));
    const std::size_t after = t.hypothesis_count(0);
    if (after > before) ++spawned;
    EXPECT_EQ(after, hidden ? 2u : 1u) << "frame " << k;
    if (hidden) {
      ASSERT_EQ(reports.size(), 4u);
      EXPECT_EQ(reports[0].hypothesis, 0);
      EXPECT_EQ(reports[1].hypothesis, 1);
      EXPECT_EQ(*reports[0].fed_measurement, left);
      EXPECT_EQ(*reports[1].fed_measurement, right);
    }
  }
  EXPECT_EQ(spawned, 1);
}

// Copyright 2026 The lorafuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lorafuse/error.hpp"
#include "lorafuse/scenario_io.hpp"
#include "lorafuse/scenario_sim.hpp"

using namespace lorafuse;

namespace
{

constexpr double kPi = std::numbers::pi;

Scenario rectangle_walk()
{
  Scenario s;
  s.duration_s = 200.0;
  s.trajectory = RectangleTrajectory{20.0, 30.0, 1, 1.0, 90.0};
  return s;
}

Scenario corridor(const std::string & profile, int anchors)
{
  return load_scenario(
    std::string(LORAFUSE_SCENARIO_DIR) + "/corridor/corridor_" + profile + "_a" +
    std::to_string(anchors) + ".json");
}

struct Means
{
  double odo = 0.0;
  double fused = 0.0;
};

Means mean_over_seeds(Scenario s, int seeds = 10)
{
  Means m;
  for (int k = 1; k <= seeds; ++k) {
    s.seed = static_cast<std::uint64_t>(k);
    const RunRecord r = run_scenario(s);
    m.odo += r.metrics.rmse_odo_m / seeds;
    m.fused += r.metrics.rmse_fused_m / seeds;
  }
  return m;
}

double planar_error(const PlanarPose & a, const PlanarPose & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

TEST(ScenarioSim, RectangleTruth)
{
  const auto truth = generate_truth(rectangle_walk());
  // 100 m of legs at 10 FPS plus four 1 s corner turns.
  ASSERT_EQ(truth.size(), 1041U);
  EXPECT_DOUBLE_EQ(truth[1].t_s, 0.1);
  EXPECT_LT(truth.back().pose.translation().head<2>().norm(), 1e-6);

  const auto at = [&](std::size_t k) {return truth[k].pose.translation();};
  EXPECT_NEAR(at(100).x(), 10.0, 1e-9);
  EXPECT_NEAR(at(100).y(), 0.0, 1e-9);
  EXPECT_NEAR(yaw_of(truth[100].pose), 0.0, 1e-12);
  // Turning in place at the first corner.
  EXPECT_NEAR(at(205).x(), 20.0, 1e-9);
  EXPECT_NEAR(yaw_of(truth[205].pose), kPi / 4, 1e-9);
  EXPECT_NEAR(at(360).x(), 20.0, 1e-9);
  EXPECT_NEAR(at(360).y(), 15.0, 1e-9);
  EXPECT_NEAR(yaw_of(truth[360].pose), kPi / 2, 1e-9);
}

TEST(ScenarioSim, StraightWaypointsHaveZeroHeading)
{
  Scenario s;
  s.duration_s = 100.0;
  s.trajectory = WaypointTrajectory{{{10.0, 0.0}}, 1.0, 90.0};
  const auto truth = generate_truth(s);
  ASSERT_EQ(truth.size(), 101U);
  for (const auto & f : truth) {
    EXPECT_EQ(yaw_of(f.pose), 0.0);
  }
  EXPECT_NEAR(truth.back().pose.translation().x(), 10.0, 1e-9);
}

TEST(ScenarioSim, TruthIsTruncatedToDuration)
{
  Scenario s = rectangle_walk();
  s.duration_s = 12.34;
  EXPECT_EQ(generate_truth(s).size(), 124U);
}

TEST(ScenarioSim, ZeroLengthPathIsRejected)
{
  Scenario s;
  s.duration_s = 10.0;
  s.trajectory = WaypointTrajectory{{{0.0, 0.0}}, 1.0, 90.0};
  try {
    generate_truth(s);
    FAIL();
  } catch (const Error & e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(ScenarioSim, NoiselessOdometryReproducesTruth)
{
  const auto truth = generate_truth(rectangle_walk());
  auto rng = make_rng(1, RngStream::kOdometry);
  const auto deltas = emulate_odometry(truth, builtin_profile("none"), rng);
  ASSERT_EQ(deltas.size(), truth.size() - 1);
  const auto chain = aggregate(truth.front().pose, deltas);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    ASSERT_LT((chain[k].matrix() - truth[k].pose.matrix()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ScenarioSim, BuiltinProfiles)
{
  for (const auto & name : builtin_profile_names()) {
    EXPECT_EQ(builtin_profile(name).name, name);
    builtin_profile(name).validate();
  }
  EXPECT_THROW(builtin_profile("tlio_like"), Error);
  OdometryProfile bad;
  bad.yaw_noise_std = -0.1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(ScenarioSim, IonetLikeStandaloneRmseBand)
{
  const Means m = mean_over_seeds(corridor("ionet_like", 0));
  EXPECT_GE(m.odo, 12.0);
  EXPECT_LE(m.odo, 23.0);
}

TEST(ScenarioSim, MilliegoLikeStandaloneRmseBand)
{
  const Means m = mean_over_seeds(corridor("milliego_like", 0));
  EXPECT_GE(m.odo, 2.2);
  EXPECT_LE(m.odo, 4.2);
}

TEST(ScenarioSim, MilliegoLikeThreeAnchorsImproves)
{
  const Means m = mean_over_seeds(corridor("milliego_like", 3));
  EXPECT_LT(m.fused, m.odo);
}

TEST(ScenarioSim, TotalLossDegeneratesToOdometry)
{
  Scenario s = corridor("ionet_like", 3);
  s.rf.loss_prob = 1.0;
  const RunRecord r = run_scenario(s);
  EXPECT_TRUE(r.rssi.empty());
  EXPECT_EQ(r.link.relays_fused, 0U);
  for (std::size_t k = 0; k < r.fused.size(); ++k) {
    // The server rebuilds odometry from float packet poses.
    ASSERT_LT(planar_error(r.fused[k], r.odometry[k]), 1e-4) << "frame " << k;
  }
}

TEST(ScenarioSim, RunIsDeterministic)
{
  const Scenario s = corridor("deeptio_like", 3);
  const RunRecord a = run_scenario(s);
  const RunRecord b = run_scenario(s);
  ASSERT_EQ(a.fused.size(), b.fused.size());
  for (std::size_t k = 0; k < a.fused.size(); ++k) {
    ASSERT_EQ(a.fused[k].x, b.fused[k].x);
    ASSERT_EQ(a.fused[k].theta, b.fused[k].theta);
    ASSERT_EQ(a.odometry[k].y, b.odometry[k].y);
  }
  EXPECT_EQ(a.pose_arrival_s, b.pose_arrival_s);
  ASSERT_EQ(a.rssi.size(), b.rssi.size());
  for (std::size_t i = 0; i < a.rssi.size(); ++i) {
    ASSERT_EQ(a.rssi[i].rssi_dbm, b.rssi[i].rssi_dbm);
  }
  EXPECT_EQ(a.metrics.rmse_fused_m, b.metrics.rmse_fused_m);
}

TEST(ScenarioSim, SeedChangesNoiseButNotTruth)
{
  Scenario s = corridor("milliego_like", 3);
  const RunRecord a = run_scenario(s);
  s.seed += 1;
  const RunRecord b = run_scenario(s);
  ASSERT_EQ(a.truth.size(), b.truth.size());
  for (std::size_t k = 0; k < a.truth.size(); ++k) {
    ASSERT_EQ(a.truth[k].x, b.truth[k].x);
  }
  bool rssi_differs = false;
  for (std::size_t i = 0; i < std::min(a.rssi.size(), b.rssi.size()); ++i) {
    rssi_differs = rssi_differs || a.rssi[i].rssi_dbm != b.rssi[i].rssi_dbm;
  }
  EXPECT_TRUE(rssi_differs);
  EXPECT_NE(a.metrics.rmse_odo_m, b.metrics.rmse_odo_m);
}

TEST(ScenarioSim, LosslessLinkDeliversEveryRelay)
{
  const Scenario s = corridor("milliego_like", 4);
  const RunRecord r = run_scenario(s);
  EXPECT_EQ(r.link.poses, r.truth.size());
  EXPECT_EQ(r.link.relays_fused, r.truth.size() * 4);
  EXPECT_EQ(r.link.late_relays + r.link.orphan_relays + r.link.bad_frames, 0U);
  for (std::size_t k = 0; k < r.t_s.size(); ++k) {
    ASSERT_NEAR(r.pose_arrival_s[k], r.t_s[k] + airtime(7), 1e-9);
  }
}

TEST(ScenarioSim, NoiselessRunConvergesToTruth)
{
  // Relays carry whole dBm, so even a noiseless world has up to 0.5 dB of
  // quantization error; four anchors keep its effect under 0.1 m.
  Scenario s = corridor("ionet_like", 4);
  s.odometry_profile = builtin_profile("none");
  s.rf.model.noise_std_db = 0.0;
  // A moving average lags a walker; without noise there is nothing to smooth.
  s.rf.smoothing_window = 1;
  s.filter.initial_state = EkfState{s.start.x + 3.0, s.start.y - 2.0, 0.0};
  const RunRecord r = run_scenario(s);
  ASSERT_GE(r.fused.size(), 1000U);
  double sq = 0.0;
  for (std::size_t k = r.fused.size() - 1000; k < r.fused.size(); ++k) {
    sq += std::pow(planar_error(r.fused[k], r.truth[k]), 2);
  }
  EXPECT_LT(std::sqrt(sq / 1000.0), 0.1);
}

TEST(ScenarioSim, LowerFrameRateIncreasesOdometryError)
{
  Scenario s = corridor("ionet_like", 0);
  const Means at10 = mean_over_seeds(s);
  s.frame_rate_fps = 5.0;
  const Means at5 = mean_over_seeds(s);
  EXPECT_GT(at5.odo, at10.odo);
}

TEST(ScenarioSim, RandomAnchorsStayNearTheWalk)
{
  Scenario s = rectangle_walk();
  s.seed = 9;
  s.anchors = RandomAnchors{5, 50.0, 1.0, std::nullopt};
  const auto truth = generate_truth(s);
  const AnchorSet a = resolve_anchors(s, truth);
  ASSERT_EQ(a.size(), 5U);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, static_cast<int>(i + 1));
    // Distance from the 20 x 30 bounding box.
    const double dx = std::max({0.0, -a[i].x, a[i].x - 20.0});
    const double dy = std::max({0.0, -a[i].y, a[i].y - 30.0});
    EXPECT_LE(std::hypot(dx, dy), 50.0);
    EXPECT_EQ(a[i].z, 1.0);
  }
  const AnchorSet again = resolve_anchors(s, truth);
  EXPECT_EQ(again[0].x, a[0].x);
  s.seed = 10;
  EXPECT_NE(resolve_anchors(s, truth)[0].x, a[0].x);
  s.anchors = RandomAnchors{5, 50.0, 1.0, 9};
  EXPECT_EQ(resolve_anchors(s, truth)[0].x, a[0].x);
}

TEST(ScenarioSim, ValidationNamesTheField)
{
  const auto message = [](const Scenario & s) {
      try {
        s.validate();
      } catch (const Error & e) {
        return std::string(e.what());
      }
      return std::string();
    };
  Scenario s = rectangle_walk();
  s.frame_rate_fps = 0.0;
  EXPECT_NE(message(s).find("frame_rate_fps"), std::string::npos);
  s = rectangle_walk();
  s.duration_s = -1.0;
  EXPECT_NE(message(s).find("duration_s"), std::string::npos);
  s = rectangle_walk();
  s.trajectory = RectangleTrajectory{20.0, 30.0, 1, 0.0, 90.0};
  EXPECT_NE(message(s).find("speed_mps"), std::string::npos);
  s = rectangle_walk();
  s.rf.sf = 12;
  EXPECT_FALSE(message(s).empty());
  s = rectangle_walk();
  s.rf.loss_prob = 2.0;
  EXPECT_NE(message(s).find("loss_prob"), std::string::npos);
  EXPECT_THROW(run_scenario(s), Error);
}

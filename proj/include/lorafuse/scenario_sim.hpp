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

#ifndef LORAFUSE__SCENARIO_SIM_HPP_
#define LORAFUSE__SCENARIO_SIM_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lorafuse/backhaul.hpp"
#include "lorafuse/ekf_fusion.hpp"
#include "lorafuse/eval_metrics.hpp"
#include "lorafuse/pose_chain.hpp"
#include "lorafuse/rf_model.hpp"

namespace lorafuse
{

/// Drift emulator standing in for a deep odometry frontend.
///
/// Noise stds are per frame at `reference_fps`; at another rate they scale
/// by reference_fps / fps so the error budget per second stays fixed.
struct OdometryProfile
{
  std::string name = "none";
  double translation_noise_std = 0.0;  // m
  double yaw_noise_std = 0.0;          // rad
  double yaw_bias_drift = 0.0;         // rad/s
  double translation_scale_error = 0.0;
  double reference_fps = 10.0;

  void validate() const;
};

/// "none", "ionet_like", "milliego_like" or "deeptio_like".
/// Throws kInvalidArgument for other names.
OdometryProfile builtin_profile(const std::string & name);
std::vector<std::string> builtin_profile_names();

struct StartPose
{
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Counter-clockwise rectangle starting at the start pose: width along the
/// initial heading, then height. Corners are turned in place.
struct RectangleTrajectory
{
  double width_m = 20.0;
  double height_m = 30.0;
  int laps = 1;
  double speed_mps = 1.0;
  double turn_rate_dps = 90.0;
};

/// Straight legs from the start position through each waypoint, turning in
/// place at every heading change.
struct WaypointTrajectory
{
  std::vector<Eigen::Vector2d> waypoints;
  double speed_mps = 1.0;
  double turn_rate_dps = 90.0;
};

using TrajectorySpec = std::variant<RectangleTrajectory, WaypointTrajectory>;

/// Uniform placement within radius_m of the bounding box of the walk.
struct RandomAnchors
{
  std::size_t count = 0;
  double radius_m = 50.0;
  double z_m = 1.0;
  /// Defaults to the scenario seed.
  std::optional<std::uint64_t> placement_seed;
};

using AnchorSpec = std::variant<std::vector<Anchor>, RandomAnchors>;

struct RfSettings
{
  PathLossModel model;
  bool nlos = false;
  /// Model the filter assumes; defaults to `nlos`. Differing values give a
  /// model-mismatch world.
  std::optional<bool> filter_nlos;
  std::size_t smoothing_window = 4;
  double loss_prob = 0.0;
  int sf = 7;
};

struct FilterSettings
{
  NoiseConfig noise;
  std::array<double, 3> p0_diag{10.0, 10.0, 1.0};
  /// Defaults to the start pose.
  std::optional<EkfState> initial_state;
};

struct Scenario
{
  std::string id = "scenario";
  std::uint64_t seed = 0;
  double frame_rate_fps = 10.0;
  double duration_s = 0.0;
  StartPose start;
  TrajectorySpec trajectory = RectangleTrajectory{};
  AnchorSpec anchors = std::vector<Anchor>{};
  OdometryProfile odometry_profile;
  RfSettings rf;
  FilterSettings filter;

  /// Throws kInvalidArgument naming the offending field.
  void validate() const;
};

struct TruthFrame
{
  double t_s;
  Pose pose;
};

/// Frames at t = k / fps, truncated to duration_s. Independent of the seed.
std::vector<TruthFrame> generate_truth(const Scenario & s);

/// Perturbs each true frame-to-frame delta by the profile. Three normal
/// draws per frame, in the order dx, dy, dyaw.
std::vector<PoseDelta> emulate_odometry(
  std::span<const TruthFrame> truth, const OdometryProfile & profile, std::mt19937_64 & rng);

/// Explicit anchors as given, or random ones placed around `truth`.
AnchorSet resolve_anchors(const Scenario & s, std::span<const TruthFrame> truth);

/// Independent generator per purpose so that, e.g., changing the loss
/// probability does not perturb the odometry noise.
enum class RngStream : std::uint32_t { kOdometry = 1, kRssi = 2, kLink = 3, kAnchors = 4 };
std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream);

struct PlanarPose
{
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct RssiRecord
{
  double t_s;
  int anchor_id;
  int rssi_dbm;
  double smoothed_dbm;
};

struct RunRecord
{
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<Anchor> anchors;
  std::vector<double> t_s;
  std::vector<PlanarPose> truth;
  std::vector<PlanarPose> odometry;
  std::vector<PlanarPose> fused;
  std::vector<double> pose_arrival_s;
  /// Relayed RSSIs that reached the filter.
  std::vector<RssiRecord> rssi;
  IngestStats link;
  RunMetrics metrics;
};

/// Runs the whole pipeline for one seed: truth, odometry emulation, pose
/// broadcast, RSSI relays over the simulated link, server ingest and fusion.
/// Deterministic for a given scenario.
RunRecord run_scenario(const Scenario & s);

std::vector<Eigen::Vector2d> positions(std::span<const PlanarPose> poses);

}  // namespace lorafuse

#endif  // LORAFUSE__SCENARIO_SIM_HPP_

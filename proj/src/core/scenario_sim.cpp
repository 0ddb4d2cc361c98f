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

#include "lorafuse/scenario_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lorafuse/error.hpp"

namespace lorafuse
{

namespace
{

void require(bool ok, const std::string & what)
{
  if (!ok) {
    raise(ErrorCode::kInvalidArgument, what);
  }
}

bool positive(double v) {return std::isfinite(v) && v > 0.0;}
bool non_negative(double v) {return std::isfinite(v) && v >= 0.0;}

double deg2rad(double d) {return d * std::numbers::pi / 180.0;}

PlanarPose planar(const RigidTransform & p)
{
  const Eigen::Vector3d t = p.translation();
  return {t.x(), t.y(), yaw_of(p)};
}

// Accumulates truth frames leg by leg. Positions along a leg are
// interpolated from its endpoints rather than summed, so closed paths close.
class PathBuilder
{
public:
  PathBuilder(const StartPose & start, double fps)
  : x_(start.x), y_(start.y), yaw_(wrap_angle(start.yaw)), fps_(fps)
  {
    frames_.push_back({x_, y_, yaw_});
  }

  void turn(double dyaw, double rate_rad_s)
  {
    if (std::abs(dyaw) < 1e-12) {
      return;
    }
    const auto n = std::max<long>(1, std::lround(std::abs(dyaw) / rate_rad_s * fps_));
    const double yaw0 = yaw_;
    for (long i = 1; i <= n; ++i) {
      frames_.push_back({x_, y_, wrap_angle(yaw0 + dyaw * static_cast<double>(i) / static_cast<double>(n))});
    }
    yaw_ = wrap_angle(yaw0 + dyaw);
  }

  void straight(double length, double speed)
  {
    if (length < 1e-12) {
      return;
    }
    const auto n = std::max<long>(1, std::lround(length / speed * fps_));
    const double x0 = x_;
    const double y0 = y_;
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    for (long i = 1; i <= n; ++i) {
      const double f = length * static_cast<double>(i) / static_cast<double>(n);
      frames_.push_back({x0 + c * f, y0 + s * f, yaw_});
    }
    x_ = x0 + c * length;
    y_ = y0 + s * length;
    length_ += length;
  }

  void set_heading(double yaw) {yaw_ = wrap_angle(yaw);}
  double x() const {return x_;}
  double y() const {return y_;}
  double yaw() const {return yaw_;}
  double length() const {return length_;}
  const std::vector<PlanarPose> & frames() const {return frames_;}

private:
  double x_, y_, yaw_, fps_;
  double length_ = 0.0;
  std::vector<PlanarPose> frames_;
};

std::vector<PlanarPose> build_path(const Scenario & s)
{
  PathBuilder path(s.start, s.frame_rate_fps);
  if (const auto * rect = std::get_if<RectangleTrajectory>(&s.trajectory)) {
    const double rate = deg2rad(rect->turn_rate_dps);
    const double quarter = std::numbers::pi / 2.0;
    int leg = 0;
    for (int lap = 0; lap < rect->laps; ++lap) {
      for (double len : {rect->width_m, rect->height_m, rect->width_m, rect->height_m}) {
        path.straight(len, rect->speed_mps);
        path.turn(quarter, rate);
        ++leg;
        // Snap the heading so the corners do not accumulate rounding.
        path.set_heading(s.start.yaw + quarter * leg);
      }
    }
  } else {
    const auto & wp = std::get<WaypointTrajectory>(s.trajectory);
    const double rate = deg2rad(wp.turn_rate_dps);
    for (const auto & p : wp.waypoints) {
      const double dx = p.x() - path.x();
      const double dy = p.y() - path.y();
      const double len = std::hypot(dx, dy);
      if (len < 1e-12) {
        continue;
      }
      path.turn(wrap_angle(std::atan2(dy, dx) - path.yaw()), rate);
      path.set_heading(std::atan2(dy, dx));
      path.straight(len, wp.speed_mps);
    }
  }
  require(path.length() > 0.0, "trajectory has zero length");
  return path.frames();
}

double distance_to_box(const Eigen::Vector2d & p, const Eigen::Vector2d & lo, const Eigen::Vector2d & hi)
{
  const Eigen::Vector2d d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
  return d.norm();
}

std::array<float, 4> yaw_quaternion(double yaw)
{
  return {
    static_cast<float>(std::cos(yaw / 2.0)), 0.0F, 0.0F, static_cast<float>(std::sin(yaw / 2.0))};
}

}  // namespace

void OdometryProfile::validate() const
{
  require(non_negative(translation_noise_std), "odometry_profile.translation_noise_std must be >= 0");
  require(non_negative(yaw_noise_std), "odometry_profile.yaw_noise_std must be >= 0");
  require(std::isfinite(yaw_bias_drift), "odometry_profile.yaw_bias_drift must be finite");
  require(
    std::isfinite(translation_scale_error) && translation_scale_error > -1.0,
    "odometry_profile.translation_scale_error must be > -1");
  require(positive(reference_fps), "odometry_profile.reference_fps must be > 0");
}

// Magnitudes from tools/calibrate_profiles on the corridor walk: standalone
// RMSE near 17.6 m (IONet), 3.2 m (milliEgo) and 3.5 m (DeepTIO).
OdometryProfile builtin_profile(const std::string & name)
{
  if (name == "none") {
    return {};
  }
  if (name == "ionet_like") {
    return {"ionet_like", 0.257874, 0.010315, 0.00257874, 0.515748, 10.0};
  }
  if (name == "milliego_like") {
    return {"milliego_like", 0.0591451, 0.00295725, 0.000591451, 0.0591451, 10.0};
  }
  if (name == "deeptio_like") {
    return {"deeptio_like", 0.0649099, 0.00324549, 0.000649099, 0.0649099, 10.0};
  }
  raise(ErrorCode::kInvalidArgument, "unknown odometry profile '" + name + "'");
}

std::vector<std::string> builtin_profile_names()
{
  return {"none", "ionet_like", "milliego_like", "deeptio_like"};
}

void Scenario::validate() const
{
  require(!id.empty(), "id must not be empty");
  require(positive(frame_rate_fps), "frame_rate_fps must be > 0");
  require(positive(duration_s), "duration_s must be > 0");
  require(
    std::isfinite(start.x) && std::isfinite(start.y) && std::isfinite(start.yaw),
    "start must be finite");
  if (const auto * rect = std::get_if<RectangleTrajectory>(&trajectory)) {
    require(positive(rect->width_m), "trajectory.width_m must be > 0");
    require(positive(rect->height_m), "trajectory.height_m must be > 0");
    require(rect->laps >= 1, "trajectory.laps must be >= 1");
    require(positive(rect->speed_mps), "trajectory.speed_mps must be > 0");
    require(positive(rect->turn_rate_dps), "trajectory.turn_rate_dps must be > 0");
  } else {
    const auto & wp = std::get<WaypointTrajectory>(trajectory);
    require(!wp.waypoints.empty(), "trajectory.waypoints must not be empty");
    for (const auto & p : wp.waypoints) {
      require(p.allFinite(), "trajectory.waypoints must be finite");
    }
    require(positive(wp.speed_mps), "trajectory.speed_mps must be > 0");
    require(positive(wp.turn_rate_dps), "trajectory.turn_rate_dps must be > 0");
  }
  if (const auto * list = std::get_if<std::vector<Anchor>>(&anchors)) {
    for (const auto & a : *list) {
      require(a.id >= 0 && a.id <= 0xFFFF, "anchors[].id must fit in 16 bits");
    }
    AnchorSet check(*list);
  } else {
    const auto & r = std::get<RandomAnchors>(anchors);
    require(r.count <= 0xFFFF, "anchors.count is too large");
    require(non_negative(r.radius_m), "anchors.radius_m must be >= 0");
    require(non_negative(r.z_m), "anchors.z_m must be >= 0");
  }
  odometry_profile.validate();
  rf.model.validate();
  require(rf.smoothing_window >= 1, "rf.smoothing_window must be >= 1");
  require(
    std::isfinite(rf.loss_prob) && rf.loss_prob >= 0.0 && rf.loss_prob <= 1.0,
    "rf.loss_prob must lie in [0, 1]");
  airtime(rf.sf);
  filter.noise.validate();
  for (double v : filter.p0_diag) {
    require(non_negative(v), "filter.p0_diag entries must be >= 0");
  }
  if (filter.initial_state) {
    const auto & x = *filter.initial_state;
    require(
      std::isfinite(x.x) && std::isfinite(x.y) && std::isfinite(x.theta),
      "filter.initial_state must be finite");
  }
}

std::vector<TruthFrame> generate_truth(const Scenario & s)
{
  s.validate();
  const auto path = build_path(s);
  const double max_frames = std::floor(s.duration_s * s.frame_rate_fps + 1e-9) + 1.0;
  const std::size_t n = std::min(path.size(), static_cast<std::size_t>(max_frames));
  std::vector<TruthFrame> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(
      {static_cast<double>(k) / s.frame_rate_fps, make_planar_pose(path[k].x, path[k].y, path[k].theta)});
  }
  return out;
}

std::vector<PoseDelta> emulate_odometry(
  std::span<const TruthFrame> truth, const OdometryProfile & profile, std::mt19937_64 & rng)
{
  profile.validate();
  require(truth.size() >= 2, "odometry emulation needs at least two truth frames");
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<PoseDelta> out;
  out.reserve(truth.size() - 1);
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const double dt = truth[k].t_s - truth[k - 1].t_s;
    require(dt > 0.0, "truth timestamps must increase");
    const double f = profile.reference_fps * dt;
    const PoseDelta d = relative(truth[k - 1].pose, truth[k].pose);
    const Eigen::Vector3d t = d.translation();
    const double nx = unit(rng);
    const double ny = unit(rng);
    const double nyaw = unit(rng);
    const double scale = 1.0 + profile.translation_scale_error;
    out.push_back(
      make_planar_delta(
        t.x() * scale + profile.translation_noise_std * f * nx,
        t.y() * scale + profile.translation_noise_std * f * ny,
        yaw_of(d) + profile.yaw_noise_std * f * nyaw + profile.yaw_bias_drift * dt));
  }
  return out;
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

AnchorSet resolve_anchors(const Scenario & s, std::span<const TruthFrame> truth)
{
  if (const auto * list = std::get_if<std::vector<Anchor>>(&s.anchors)) {
    return AnchorSet(*list);
  }
  const auto & spec = std::get<RandomAnchors>(s.anchors);
  require(!truth.empty(), "random anchor placement needs a trajectory");
  Eigen::Vector2d lo = truth.front().pose.translation().head<2>();
  Eigen::Vector2d hi = lo;
  for (const auto & f : truth) {
    lo = lo.cwiseMin(f.pose.translation().head<2>());
    hi = hi.cwiseMax(f.pose.translation().head<2>());
  }
  auto rng = make_rng(spec.placement_seed.value_or(s.seed), RngStream::kAnchors);
  std::uniform_real_distribution<double> ux(lo.x() - spec.radius_m, hi.x() + spec.radius_m);
  std::uniform_real_distribution<double> uy(lo.y() - spec.radius_m, hi.y() + spec.radius_m);
  std::vector<Anchor> anchors;
  while (anchors.size() < spec.count) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    if (distance_to_box(p, lo, hi) <= spec.radius_m) {
      anchors.push_back({static_cast<int>(anchors.size()) + 1, p.x(), p.y(), spec.z_m});
    }
  }
  return AnchorSet(std::move(anchors));
}

std::vector<Eigen::Vector2d> positions(std::span<const PlanarPose> poses)
{
  std::vector<Eigen::Vector2d> out;
  out.reserve(poses.size());
  for (const auto & p : poses) {
    out.emplace_back(p.x, p.y);
  }
  return out;
}

RunRecord run_scenario(const Scenario & s)
{
  const auto truth = generate_truth(s);
  require(truth.size() >= 2, "scenario yields fewer than two frames");
  const std::size_t n = truth.size();

  auto odo_rng = make_rng(s.seed, RngStream::kOdometry);
  auto rssi_rng = make_rng(s.seed, RngStream::kRssi);
  const auto deltas = emulate_odometry(truth, s.odometry_profile, odo_rng);
  const auto odo_poses = aggregate(truth.front().pose, deltas);
  const AnchorSet anchors = resolve_anchors(s, truth);

  RunRecord rec;
  rec.scenario_id = s.id;
  rec.seed = s.seed;
  rec.anchors.assign(anchors.anchors().begin(), anchors.anchors().end());
  for (std::size_t k = 0; k < n; ++k) {
    rec.t_s.push_back(truth[k].t_s);
    rec.truth.push_back(planar(truth[k].pose));
    rec.odometry.push_back(planar(odo_poses[k]));
  }

  // Transmitter broadcasts every pose; each anchor measures the broadcast
  // and relays its RSSI one hop later. Only relays cross the lossy link.
  const double hop_s = airtime(s.rf.sf);
  const double frame_s = 1.0 / s.frame_rate_fps;
  LinkSimulator relay_link({s.rf.sf, s.rf.loss_prob, make_rng(s.seed, RngStream::kLink)()});
  constexpr std::uint16_t kDeviceId = 1;
  std::vector<Delivery> deliveries;
  deliveries.reserve(n * (1 + anchors.size()));
  for (std::size_t k = 0; k < n; ++k) {
    const auto & o = rec.odometry[k];
    PosePacket pose;
    pose.device_id = kDeviceId;
    pose.seq = static_cast<std::uint32_t>(k);
    pose.timestamp_ms = static_cast<std::uint64_t>(std::llround(truth[k].t_s * 1000.0));
    pose.translation = {static_cast<float>(o.x), static_cast<float>(o.y), 0.0F};
    pose.yaw = static_cast<float>(o.theta);
    pose.quaternion = yaw_quaternion(o.theta);
    const double heard_s = truth[k].t_s + hop_s;
    deliveries.push_back({encode(pose), heard_s});

    const Eigen::Vector3d p = truth[k].pose.translation();
    for (const auto & a : anchors.anchors()) {
      const double d = std::hypot(p.x() - a.x, p.y() - a.y, a.z);
      // Inside the reference distance the model is undefined; the receiver
      // reads as if at d0.
      double rssi = sample_rssi(s.rf.model, std::max(d, s.rf.model.ref_distance_m), s.rf.nlos, rssi_rng);
      rssi = std::clamp<double>(rssi, kMinRssiDbm, kMaxRssiDbm);
      RssiRelayPacket relay{
        static_cast<std::uint16_t>(a.id), kDeviceId, pose.seq, static_cast<std::int16_t>(rssi)};
      if (auto dl = relay_link.hop(encode(relay), heard_s)) {
        deliveries.push_back(std::move(*dl));
      }
    }
  }

  auto ingest = server_ingest(std::move(deliveries), {hop_s + frame_s});
  rec.link = ingest.stats;

  const EkfState x0 = s.filter.initial_state.value_or(EkfState{s.start.x, s.start.y, s.start.yaw});
  const Covariance3 p0 =
    Eigen::Vector3d(s.filter.p0_diag[0], s.filter.p0_diag[1], s.filter.p0_diag[2]).asDiagonal();
  EkfFilter filter(
    x0, p0, s.filter.noise, anchors, s.rf.model,
    {s.rf.filter_nlos.value_or(s.rf.nlos), s.rf.smoothing_window});

  std::vector<std::optional<PlanarPose>> fused(n);
  std::vector<std::optional<double>> arrival(n);
  fused[0] = PlanarPose{filter.state().x, filter.state().y, filter.state().theta};
  std::optional<Pose> prev;
  std::uint64_t prev_ms = 0;
  std::vector<std::optional<double>> rssis(anchors.size());
  for (const auto & in : ingest.inputs) {
    const std::size_t k = in.pose.seq;
    if (k >= n) {
      continue;
    }
    arrival[k] = in.pose_arrival_s;
    const Pose cur = make_planar_pose(in.pose.translation[0], in.pose.translation[1], in.pose.yaw);
    if (!prev) {
      prev = cur;
      prev_ms = in.pose.timestamp_ms;
      continue;
    }
    std::fill(rssis.begin(), rssis.end(), std::nullopt);
    for (const auto & [id, dbm] : in.rssi_by_anchor) {
      if (auto idx = anchors.index_of(id)) {
        rssis[*idx] = dbm;
      }
    }
    const double dt = static_cast<double>(in.pose.timestamp_ms - prev_ms) / 1000.0;
    const EkfState st = filter.step(relative(*prev, cur), dt, rssis);
    fused[k] = PlanarPose{st.x, st.y, st.theta};
    for (std::size_t i = 0; i < rssis.size(); ++i) {
      if (rssis[i]) {
        rec.rssi.push_back(
          {truth[k].t_s, anchors[i].id, static_cast<int>(*rssis[i]), *filter.smoothed_rssi(i)});
      }
    }
    prev = cur;
    prev_ms = in.pose.timestamp_ms;
  }
  // A frame whose pose never arrived keeps the last estimate.
  for (std::size_t k = 0; k < n; ++k) {
    if (!fused[k]) {
      fused[k] = fused[k - 1];
    }
    rec.fused.push_back(*fused[k]);
    rec.pose_arrival_s.push_back(arrival[k].value_or(std::nan("")));
  }

  rec.metrics.scenario_id = s.id;
  rec.metrics.profile = s.odometry_profile.name;
  rec.metrics.anchors = anchors.size();
  rec.metrics.seed = s.seed;
  const auto gt = positions(rec.truth);
  rec.metrics.rmse_odo_m = rmse(positions(rec.odometry), gt);
  rec.metrics.rmse_fused_m = rmse(positions(rec.fused), gt);
  if (!anchors.empty() && rec.metrics.rmse_odo_m > 0.0) {
    rec.metrics.gain = accuracy_gain(rec.metrics.rmse_odo_m, rec.metrics.rmse_fused_m);
  }
  return rec;
}

}  // namespace lorafuse

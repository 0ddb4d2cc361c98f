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

#ifndef LORAFUSE__EKF_FUSION_HPP_
#define LORAFUSE__EKF_FUSION_HPP_

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lorafuse/pose_chain.hpp"
#include "lorafuse/rf_model.hpp"

namespace lorafuse
{

/// Planar state [x, y, theta]; theta in (-pi, pi].
struct EkfState
{
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Eigen::Vector3d vector() const {return {x, y, theta};}
  static EkfState from_vector(const Eigen::Vector3d & v);
};

using Covariance3 = Eigen::Matrix3d;

/// Process / measurement noise. Defaults: Q = diag[0.1, 0.1, 0.01],
/// sigma_x = sigma_y = 0.15 m, heading variance 10 (1 - exp(-0.2 |w|)) with a
/// 1e-4 rad^2 floor, RSSI variance 4.887^2 dB^2.
struct NoiseConfig
{
  std::array<double, 3> q_diag{0.1, 0.1, 0.01};
  double sigma_xy = 0.15;
  double theta_var_gain = 10.0;
  double theta_var_rate = 0.2;
  double theta_var_floor = 1e-4;
  double rssi_var = 4.887 * 4.887;

  void validate() const;
};

Covariance3 default_initial_covariance();

struct Anchor
{
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Known anchor positions; ids unique, coordinates finite.
class AnchorSet
{
public:
  AnchorSet() = default;
  explicit AnchorSet(std::vector<Anchor> anchors);

  std::size_t size() const {return anchors_.size();}
  bool empty() const {return anchors_.empty();}
  const Anchor & operator[](std::size_t i) const {return anchors_[i];}
  std::span<const Anchor> anchors() const {return anchors_;}
  std::optional<std::size_t> index_of(int id) const;

private:
  std::vector<Anchor> anchors_;
};

/// z_k = [xi_x, xi_y, xi_theta, gamma_1 .. gamma_M]. Odometry rows are
/// dropped when `has_odometry` is false; RSSI rows are dropped per missing
/// entry.
struct Measurement
{
  bool has_odometry = true;
  double xi_x = 0.0;
  double xi_y = 0.0;
  double xi_theta = 0.0;
  std::vector<std::optional<double>> gammas;
  double omega = 0.0;
};

/// Heading measurement variance as a function of turn rate |w| (rad/s).
double heading_variance(double omega, const NoiseConfig & cfg);

/// Anchors closer than this to (x, y, 0) make h(x) near-singular.
inline constexpr double kMinAnchorDistance = 0.1;

/// h(x): (x, y, theta) followed by the model RSSI at the 3D distance from
/// (x, y, 0) to each anchor.
Eigen::VectorXd measurement_fn(
  const EkfState & s, const AnchorSet & anchors, const PathLossModel & model, bool nlos = false);

/// dh/dx, (3 + M) x 3. Top block is identity; RSSI rows are
/// [a (x - xi), a (y - yi), 0] / (ln 10 |p - pi|^2).
Eigen::MatrixXd measurement_jacobian(
  const EkfState & s, const AnchorSet & anchors, const PathLossModel & model, bool nlos = false);

struct FilterOptions
{
  bool nlos = false;
  std::size_t smoothing_window = 4;
};

/// Augmented EKF over [x, y, theta] with an identity transition model.
///
/// step() drives one odometry frame. The odometry chain is re-anchored on
/// the last posterior, so each delta is applied to the fused pose rather
/// than to a drifting pose integrated from the start. The prior mean is that
/// re-anchored pose; the covariance is propagated with F = I and grows by Q
/// plus the odometry noise diag(sigma_xy^2, sigma_xy^2, sigma_theta^2(w)).
/// The update then fuses the smoothed RSSIs. update() on its own still
/// accepts odometry rows for callers that keep an unanchored chain.
///
/// Single owner; not safe for concurrent mutation.
class EkfFilter
{
public:
  EkfFilter(
    const EkfState & x0, const Covariance3 & p0, const NoiseConfig & cfg,
    AnchorSet anchors, const PathLossModel & model, const FilterOptions & opts = {});

  /// x_k = x_{k-1}; P = P + Q.
  void predict();

  /// Fuses z; absent rows, and RSSI rows of anchors within kMinAnchorDistance
  /// of the state, are dropped. No rows means no-op.
  /// Throws kNumericalFailure if the innovation covariance is singular.
  void update(const Measurement & z);

  /// Shifts the mean by an odometry increment expressed in the body frame of
  /// the current estimate. Covariance untouched.
  void propagate(const PoseDelta & delta);

  /// One odometry frame: aggregate, smooth present RSSIs, propagate,
  /// predict with the odometry noise, update. `rssis` is indexed like the
  /// anchor set.
  EkfState step(const PoseDelta & odo_delta, double dt, std::span<const std::optional<double>> rssis);

  const EkfState & state() const {return state_;}
  const Covariance3 & covariance() const {return cov_;}
  const AnchorSet & anchors() const {return anchors_;}
  const NoiseConfig & noise() const {return cfg_;}
  const PathLossModel & model() const {return model_;}
  const Pose & odometry_pose() const {return chain_;}

  /// Smoothed RSSI of anchor i, or nullopt before its first sample.
  std::optional<double> smoothed_rssi(std::size_t i) const;

  /// Sum over anchors fused in the last step of | |p - p_m| - d_m(gamma_m) |.
  /// Logged only; the filter does not minimize it directly.
  double range_disparity() const {return range_disparity_;}

private:
  void reanchor_chain();

  EkfState state_;
  Covariance3 cov_;
  NoiseConfig cfg_;
  AnchorSet anchors_;
  PathLossModel model_;
  FilterOptions opts_;
  Pose chain_;
  std::vector<SmoothingWindow> windows_;
  double range_disparity_ = 0.0;
};

}  // namespace lorafuse

#endif  // LORAFUSE__EKF_FUSION_HPP_

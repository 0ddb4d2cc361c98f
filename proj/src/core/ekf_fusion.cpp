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

#include "lorafuse/ekf_fusion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <set>
#include <string>
#include <utility>

#include "lorafuse/error.hpp"

namespace lorafuse
{

namespace
{

constexpr double kPsdTol = 1e-9;

bool is_psd(const Covariance3 & p)
{
  if (!p.allFinite()) {
    return false;
  }
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > kPsdTol) {
    return false;
  }
  const Eigen::SelfAdjointEigenSolver<Covariance3> es(p, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -kPsdTol;
}

Eigen::Vector3d planar_offset(const EkfState & s, const Anchor & a)
{
  return {s.x - a.x, s.y - a.y, -a.z};
}

double checked_sq_distance(const EkfState & s, const Anchor & a)
{
  const double d2 = planar_offset(s, a).squaredNorm();
  if (!(d2 >= kMinAnchorDistance * kMinAnchorDistance)) {
    raise(
      ErrorCode::kNearSingularity,
      "anchor " + std::to_string(a.id) + " is within " + std::to_string(kMinAnchorDistance) +
      " m of the state position");
  }
  return d2;
}

}  // namespace

EkfState EkfState::from_vector(const Eigen::Vector3d & v)
{
  return {v.x(), v.y(), wrap_angle(v.z())};
}

void NoiseConfig::validate() const
{
  auto check = [](double v, const char * name) {
      if (!std::isfinite(v) || v < 0.0) {
        raise(ErrorCode::kInvalidArgument, std::string("noise parameter ") + name + " must be >= 0");
      }
    };
  check(q_diag[0], "q_diag[0]");
  check(q_diag[1], "q_diag[1]");
  check(q_diag[2], "q_diag[2]");
  check(sigma_xy, "sigma_xy");
  check(theta_var_gain, "theta_var_gain");
  check(theta_var_rate, "theta_var_rate");
  check(theta_var_floor, "theta_var_floor");
  check(rssi_var, "rssi_var");
}

Covariance3 default_initial_covariance()
{
  return Eigen::Vector3d(10.0, 10.0, 1.0).asDiagonal();
}

AnchorSet::AnchorSet(std::vector<Anchor> anchors)
: anchors_(std::move(anchors))
{
  std::set<int> ids;
  for (const auto & a : anchors_) {
    if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(a.z)) {
      raise(ErrorCode::kInvalidArgument, "anchor " + std::to_string(a.id) + " has non-finite coordinates");
    }
    if (!ids.insert(a.id).second) {
      raise(ErrorCode::kInvalidArgument, "duplicate anchor id " + std::to_string(a.id));
    }
  }
}

std::optional<std::size_t> AnchorSet::index_of(int id) const
{
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (anchors_[i].id == id) {
      return i;
    }
  }
  return std::nullopt;
}

double heading_variance(double omega, const NoiseConfig & cfg)
{
  if (!(omega >= 0.0)) {
    raise(ErrorCode::kInvalidArgument, "angular velocity magnitude must be >= 0");
  }
  const double v = cfg.theta_var_gain * -std::expm1(-cfg.theta_var_rate * omega);
  return std::max(cfg.theta_var_floor, v);
}

Eigen::VectorXd measurement_fn(
  const EkfState & s, const AnchorSet & anchors, const PathLossModel & model, bool nlos)
{
  Eigen::VectorXd h(3 + anchors.size());
  h.head<3>() = s.vector();
  const double slope = model.effective_slope(nlos);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double d2 = checked_sq_distance(s, anchors[i]);
    h(3 + static_cast<Eigen::Index>(i)) = slope * 0.5 * std::log10(d2) + model.intercept_dbm;
  }
  return h;
}

Eigen::MatrixXd measurement_jacobian(
  const EkfState & s, const AnchorSet & anchors, const PathLossModel & model, bool nlos)
{
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 + anchors.size(), 3);
  jac.topRows<3>().setIdentity();
  const double slope = model.effective_slope(nlos);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double d2 = checked_sq_distance(s, anchors[i]);
    const double k = slope / (std::numbers::ln10 * d2);
    const auto row = 3 + static_cast<Eigen::Index>(i);
    jac(row, 0) = k * (s.x - anchors[i].x);
    jac(row, 1) = k * (s.y - anchors[i].y);
  }
  return jac;
}

EkfFilter::EkfFilter(
  const EkfState & x0, const Covariance3 & p0, const NoiseConfig & cfg,
  AnchorSet anchors, const PathLossModel & model, const FilterOptions & opts)
: state_{x0.x, x0.y, wrap_angle(x0.theta)},
  cov_(p0),
  cfg_(cfg),
  anchors_(std::move(anchors)),
  model_(model),
  opts_(opts),
  chain_(make_planar_pose(x0.x, x0.y, x0.theta))
{
  if (!std::isfinite(x0.x) || !std::isfinite(x0.y) || !std::isfinite(x0.theta)) {
    raise(ErrorCode::kInvalidArgument, "initial state must be finite");
  }
  if (!is_psd(p0)) {
    raise(ErrorCode::kInvalidArgument, "initial covariance must be symmetric positive semidefinite");
  }
  cfg_.validate();
  model_.validate();
  windows_.assign(anchors_.size(), SmoothingWindow(opts_.smoothing_window));
}

void EkfFilter::predict()
{
  cov_ += Eigen::Vector3d(cfg_.q_diag[0], cfg_.q_diag[1], cfg_.q_diag[2]).asDiagonal();
}

void EkfFilter::update(const Measurement & z)
{
  if (z.gammas.size() != anchors_.size()) {
    raise(ErrorCode::kInvalidArgument, "measurement RSSI count does not match the anchor set");
  }
  const double slope = model_.effective_slope(opts_.nlos);
  std::vector<Eigen::Vector3d> jac_rows;
  std::vector<double> residuals;
  std::vector<double> r_rows;
  if (z.has_odometry) {
    const double sxy2 = cfg_.sigma_xy * cfg_.sigma_xy;
    jac_rows.insert(jac_rows.end(), {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ()});
    residuals.insert(
      residuals.end(),
      {z.xi_x - state_.x, z.xi_y - state_.y, wrap_angle(z.xi_theta - state_.theta)});
    r_rows.insert(r_rows.end(), {sxy2, sxy2, heading_variance(z.omega, cfg_)});
  }
  for (std::size_t i = 0; i < z.gammas.size(); ++i) {
    if (!z.gammas[i]) {
      continue;
    }
    const Eigen::Vector3d off = planar_offset(state_, anchors_[i]);
    const double d2 = off.squaredNorm();
    // Directly under an anchor the range model has no usable gradient.
    if (d2 < kMinAnchorDistance * kMinAnchorDistance) {
      continue;
    }
    const double k = slope / (std::numbers::ln10 * d2);
    jac_rows.emplace_back(k * off.x(), k * off.y(), 0.0);
    residuals.push_back(*z.gammas[i] - (slope * 0.5 * std::log10(d2) + model_.intercept_dbm));
    r_rows.push_back(cfg_.rssi_var);
  }
  if (jac_rows.empty()) {
    return;
  }

  const auto m = static_cast<Eigen::Index>(jac_rows.size());
  Eigen::MatrixXd jac(m, 3);
  Eigen::VectorXd residual(m);
  Eigen::VectorXd r_diag(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    jac.row(k) = jac_rows[static_cast<std::size_t>(k)].transpose();
    residual(k) = residuals[static_cast<std::size_t>(k)];
    r_diag(k) = r_rows[static_cast<std::size_t>(k)];
  }

  const Eigen::MatrixXd innovation = jac * cov_ * jac.transpose() + Eigen::MatrixXd(r_diag.asDiagonal());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
    ldlt.vectorD().minCoeff() <= 0.0)
  {
    raise(ErrorCode::kNumericalFailure, "innovation covariance is not invertible");
  }
  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::MatrixXd gain = ldlt.solve(jac * cov_).transpose();
  if (!gain.allFinite()) {
    raise(ErrorCode::kNumericalFailure, "Kalman gain is not finite");
  }

  state_ = EkfState::from_vector(state_.vector() + gain * residual);
  cov_ = (Covariance3::Identity() - gain * jac) * cov_;
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

void EkfFilter::propagate(const PoseDelta & delta)
{
  const Eigen::Vector3d t = delta.translation();
  const double c = std::cos(state_.theta);
  const double s = std::sin(state_.theta);
  state_.x += c * t.x() - s * t.y();
  state_.y += s * t.x() + c * t.y();
  state_.theta = wrap_angle(state_.theta + yaw_of(delta));
}

EkfState EkfFilter::step(
  const PoseDelta & odo_delta, double dt, std::span<const std::optional<double>> rssis)
{
  if (rssis.size() != anchors_.size()) {
    raise(ErrorCode::kInvalidArgument, "RSSI count does not match the anchor set");
  }
  const double omega = angular_velocity(odo_delta, dt);

  chain_ = compose(chain_, odo_delta);

  Measurement z;
  z.has_odometry = true;
  z.xi_x = chain_.translation().x();
  z.xi_y = chain_.translation().y();
  z.xi_theta = yaw_of(chain_);
  z.omega = omega;
  z.gammas.resize(anchors_.size());
  for (std::size_t i = 0; i < rssis.size(); ++i) {
    if (rssis[i]) {
      z.gammas[i] = smooth_rssi(windows_[i], *rssis[i]);
    }
  }

  // The chain is anchored on the previous posterior, so its planar pose is
  // exactly the propagated mean. Fusing xi as a measurement as well would
  // count the same information twice; its noise goes into the prior instead.
  state_ = EkfState{z.xi_x, z.xi_y, z.xi_theta};
  predict();
  const double sxy2 = cfg_.sigma_xy * cfg_.sigma_xy;
  cov_ += Eigen::Vector3d(sxy2, sxy2, heading_variance(omega, cfg_)).asDiagonal();
  z.has_odometry = false;
  update(z);
  reanchor_chain();

  range_disparity_ = 0.0;
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (z.gammas[i]) {
      const double range = planar_offset(state_, anchors_[i]).norm();
      range_disparity_ += std::abs(range - distance_from_rssi(model_, *z.gammas[i], opts_.nlos));
    }
  }
  return state_;
}

std::optional<double> EkfFilter::smoothed_rssi(std::size_t i) const
{
  if (i >= windows_.size() || windows_[i].empty()) {
    return std::nullopt;
  }
  return windows_[i].mean();
}

void EkfFilter::reanchor_chain()
{
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(
    state_.theta - yaw_of(chain_), Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Eigen::Vector3d t = chain_.translation();
  t.x() = state_.x;
  t.y() = state_.y;
  chain_ = Pose(rz * chain_.rotation(), t);
}

}  // namespace lorafuse

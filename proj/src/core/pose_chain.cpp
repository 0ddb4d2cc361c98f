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

#include "lorafuse/pose_chain.hpp"

#include <cmath>
#include <numbers>

#include "lorafuse/error.hpp"

namespace lorafuse
{

namespace
{

constexpr double kDegenerateYawTol = 1e-9;

}  // namespace

RigidTransform::RigidTransform(const Eigen::Matrix4d & m)
{
  if (!m.allFinite()) {
    raise(ErrorCode::kInvalidArgument, "rigid transform has non-finite entries");
  }
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    raise(ErrorCode::kInvalidArgument, "rigid transform bottom row must be [0 0 0 1]");
  }
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (r.determinant() <= 0.0) {
    raise(ErrorCode::kInvalidArgument, "rotation block must have positive determinant");
  }
  m_ = m;
  m_.topLeftCorner<3, 3>() = renormalize_rotation(r);
}

RigidTransform::RigidTransform(
  const Eigen::Matrix3d & rotation,
  const Eigen::Vector3d & translation)
: RigidTransform([&] {
      Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
      m.topLeftCorner<3, 3>() = rotation;
      m.topRightCorner<3, 1>() = translation;
      return m;
    }())
{
}

double wrap_angle(double a)
{
  constexpr double kPi = std::numbers::pi;
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) {
    w += 2.0 * kPi;
  }
  return w;
}

Eigen::Matrix3d renormalize_rotation(const Eigen::Matrix3d & r)
{
  // The quaternion constructor is exact for orthonormal input and a good
  // projection for the tiny drift that accumulates from repeated products.
  Eigen::Quaterniond q(r);
  q.normalize();
  return q.toRotationMatrix();
}

Pose make_initial_pose(double x0, double y0)
{
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    raise(ErrorCode::kInvalidArgument, "initial position must be finite");
  }
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = x0;
  m(1, 3) = y0;
  return Pose(m);
}

Pose make_planar_pose(double x, double y, double yaw)
{
  const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return Pose(r, Eigen::Vector3d(x, y, 0.0));
}

PoseDelta make_planar_delta(double dx, double dy, double dyaw)
{
  const Eigen::Matrix3d r = Eigen::AngleAxisd(dyaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return PoseDelta(r, Eigen::Vector3d(dx, dy, 0.0));
}

Pose compose(const Pose & prev, const PoseDelta & delta)
{
  Eigen::Matrix4d m = prev.matrix() * delta.matrix();
  m.row(3) << 0.0, 0.0, 0.0, 1.0;
  return Pose(m);
}

PoseDelta relative(const Pose & from, const Pose & to)
{
  const Eigen::Matrix3d rt = from.rotation().transpose();
  return PoseDelta(rt * to.rotation(), rt * (to.translation() - from.translation()));
}

double yaw_of(const RigidTransform & p)
{
  const Eigen::Matrix4d & m = p.matrix();
  const double cx = m(0, 0);
  const double cy = m(1, 0);
  if (std::hypot(cx, cy) < kDegenerateYawTol) {
    raise(ErrorCode::kDegeneratePose, "body x-axis is vertical; yaw undefined");
  }
  return wrap_angle(std::atan2(cy, cx));
}

double angular_velocity(const PoseDelta & delta, double dt)
{
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    raise(ErrorCode::kInvalidArgument, "frame interval must be > 0");
  }
  const Eigen::AngleAxisd aa(delta.rotation());
  return std::abs(aa.angle()) / dt;
}

std::vector<Pose> aggregate(const Pose & start, std::span<const PoseDelta> deltas)
{
  std::vector<Pose> out;
  out.reserve(deltas.size() + 1);
  out.push_back(start);
  for (const auto & d : deltas) {
    out.push_back(compose(out.back(), d));
  }
  return out;
}

}  // namespace lorafuse

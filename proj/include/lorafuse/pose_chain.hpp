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

#ifndef LORAFUSE__POSE_CHAIN_HPP_
#define LORAFUSE__POSE_CHAIN_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace lorafuse
{

/// Homogeneous 4x4 rigid transform. The rotation block is kept orthonormal
/// with det = +1 and the bottom row is exactly [0 0 0 1].
class RigidTransform
{
public:
  RigidTransform() : m_(Eigen::Matrix4d::Identity()) {}

  /// Validates the bottom row and finiteness, then re-projects the rotation
  /// block onto SO(3). Throws kInvalidArgument otherwise.
  explicit RigidTransform(const Eigen::Matrix4d & m);

  RigidTransform(const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation);

  const Eigen::Matrix4d & matrix() const {return m_;}
  Eigen::Matrix3d rotation() const {return m_.topLeftCorner<3, 3>();}
  Eigen::Vector3d translation() const {return m_.topRightCorner<3, 1>();}

protected:
  Eigen::Matrix4d m_;
};

/// Absolute pose in the global frame (C_k).
class Pose : public RigidTransform
{
public:
  using RigidTransform::RigidTransform;
};

/// Frame-to-frame transform T_{k,k-1}; expressed in the previous pose's frame.
class PoseDelta : public RigidTransform
{
public:
  using RigidTransform::RigidTransform;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Nearest rotation matrix (polar projection through a normalized quaternion).
Eigen::Matrix3d renormalize_rotation(const Eigen::Matrix3d & r);

/// Identity rotation (facing +x) at (x0, y0, 0).
Pose make_initial_pose(double x0, double y0);

/// Planar pose: rotation about +z by `yaw`, translation (x, y, 0).
Pose make_planar_pose(double x, double y, double yaw);

/// Planar delta: forward `dx`, left `dy` in the body frame, then yaw by `dyaw`.
PoseDelta make_planar_delta(double dx, double dy, double dyaw);

/// C_k = C_{k-1} T_{k,k-1}, renormalized.
Pose compose(const Pose & prev, const PoseDelta & delta);

/// The transform taking `from` to `to`: from^-1 * to.
PoseDelta relative(const Pose & from, const Pose & to);

/// Heading of the body x-axis projected on the ground plane, in (-pi, pi].
/// Throws kDegeneratePose when that axis is (nearly) vertical.
double yaw_of(const RigidTransform & p);

/// Rotation angle of the delta divided by dt (rad/s). dt must be > 0.
double angular_velocity(const PoseDelta & delta, double dt);

/// [start, start*T1, start*T1*T2, ...]; length = deltas.size() + 1.
std::vector<Pose> aggregate(const Pose & start, std::span<const PoseDelta> deltas);

}  // namespace lorafuse

#endif  // LORAFUSE__POSE_CHAIN_HPP_

// Copyright 2026 The hkdmpc Authors
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

#pragma once

#include <cmath>
#include <stdexcept>

#include "hkd/core/rotation.hpp"
#include "hkd/core/types.hpp"
#include "hkd/model/robot_params.hpp"

namespace hkd {

inline void check_leg_index(int leg) {
  if (leg < 0 || leg >= kNumLegs) throw std::out_of_range("leg index out of range");
}

/// Foot position in the body frame for a 3-DoF leg: ab/ad rotation about x,
/// hip and knee rotations about y. q = (abad, hip, knee). At q = 0 the leg
/// hangs straight down: hip_offset + (0, side*l1, -(l2+l3)).
inline Vector3d leg_forward_kinematics(const Vector3d& q, int leg, const RobotParams& params) {
  check_leg_index(leg);
  const double l1s = leg_side_sign(leg) * params.link_abad;
  const double l2n = -params.link_upper;
  const double l3n = -params.link_lower;
  const double s1 = std::sin(q.x()), c1 = std::cos(q.x());
  const double s2 = std::sin(q.y()), c2 = std::cos(q.y());
  const double s23 = std::sin(q.y() + q.z()), c23 = std::cos(q.y() + q.z());
  const double a = l2n * c2 + l3n * c23;  // leg-plane chain, vertical component
  const double b = l2n * s2 + l3n * s23;  // leg-plane chain, sagittal component
  return params.hip_offsets[leg] + Vector3d(b, l1s * c1 - s1 * a, l1s * s1 + c1 * a);
}

/// d(foot_body)/dq, 3x3. Singular when the knee is straight (q3 = 0).
inline Matrix3d leg_jacobian(const Vector3d& q, int leg, const RobotParams& params) {
  check_leg_index(leg);
  const double l1s = leg_side_sign(leg) * params.link_abad;
  const double l2n = -params.link_upper;
  const double l3n = -params.link_lower;
  const double s1 = std::sin(q.x()), c1 = std::cos(q.x());
  const double s2 = std::sin(q.y()), c2 = std::cos(q.y());
  const double s23 = std::sin(q.y() + q.z()), c23 = std::cos(q.y() + q.z());
  const double a = l2n * c2 + l3n * c23;
  const double b = l2n * s2 + l3n * s23;
  Matrix3d j;
  j << 0, a, l3n * c23,                                 //
      -l1s * s1 - c1 * a, s1 * b, s1 * l3n * s23,       //
      l1s * c1 - s1 * a, -c1 * b, -c1 * l3n * s23;
  return j;
}

/// World-frame foot position: stored foothold for stance legs,
/// p + R * FW(q) for swing legs.
inline Vector3d world_foot_position(const HkdState& state, int leg, const RobotParams& params) {
  check_leg_index(leg);
  const LegState& ls = state.legs[leg];
  if (ls.stance) return ls.foothold();
  return state.com_pos + rotation_world_from_body(state.euler) *
                             leg_forward_kinematics(ls.joints(), leg, params);
}

/// World-frame z of a swing foot, plus its gradient in the packed 24-dim
/// state layout (euler, com, angvel, linvel, leg slots). Used by the
/// touchdown equality and swing-clearance constraints.
inline double swing_foot_height(const Eigen::Ref<const VectorXd>& x, int leg,
                                const RobotParams& params, VectorXd* grad = nullptr) {
  check_leg_index(leg);
  const Vector3d euler = x.segment<3>(0);
  const Vector3d q = x.segment<3>(leg_state_offset(leg));
  const Matrix3d r = rotation_world_from_body(euler);
  const Vector3d fk = leg_forward_kinematics(q, leg, params);
  const double z = x(5) + (r * fk).z();
  if (grad) {
    grad->setZero(kStateDim);
    const Matrix3d axes = rotation_rate_axes(euler);
    for (int i = 0; i < 3; ++i) (*grad)(i) = (r * axes.col(i).cross(fk)).z();
    (*grad)(5) = 1.0;
    const Matrix3d j = leg_jacobian(q, leg, params);
    grad->segment<3>(leg_state_offset(leg)) = (r * j).row(2).transpose();
  }
  return z;
}

}  // namespace hkd

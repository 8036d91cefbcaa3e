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

#include <Eigen/Dense>

#include <stdexcept>

#include "hkd/core/rotation.hpp"
#include "hkd/core/types.hpp"
#include "hkd/model/kinematics.hpp"
#include "hkd/model/robot_params.hpp"

namespace hkd {

inline Vector3d gravity_vector() { return Vector3d(0, 0, -kGravity); }

/// Hybrid kinodynamic continuous dynamics on the packed 24/12 layout.
/// Body: single-rigid-body rotation/translation driven by the stance GRFs;
/// stance footholds are constants of the flow; swing joints integrate the
/// commanded joint velocity.
inline VectorXd hkd_dynamics(const Eigen::Ref<const VectorXd>& x,
                             const Eigen::Ref<const VectorXd>& u, const ContactMode& mode,
                             const RobotParams& params) {
  const Vector3d euler = x.segment<3>(0);
  const Vector3d p = x.segment<3>(3);
  const Vector3d omega = x.segment<3>(6);
  const Vector3d v = x.segment<3>(9);
  const Matrix3d r = rotation_world_from_body(euler);

  Vector3d moment_w = Vector3d::Zero();  // world-frame moment about the CoM
  Vector3d force_sum = Vector3d::Zero();
  for (int j = 0; j < kNumLegs; ++j) {
    if (!mode.stance[j]) continue;
    const Vector3d pf = x.segment<3>(leg_state_offset(j));
    const Vector3d lambda = u.segment<3>(leg_control_offset(j));
    moment_w += (pf - p).cross(lambda);
    force_sum += lambda;
  }

  VectorXd xdot = VectorXd::Zero(kStateDim);
  xdot.segment<3>(0) = euler_rate_matrix_clamped(euler) * omega;
  xdot.segment<3>(3) = v;
  xdot.segment<3>(6) = params.body_inertia.ldlt().solve(
      -omega.cross(params.body_inertia * omega) + r.transpose() * moment_w);
  xdot.segment<3>(9) = gravity_vector() + force_sum / params.mass;
  for (int j = 0; j < kNumLegs; ++j) {
    if (!mode.stance[j])
      xdot.segment<3>(leg_state_offset(j)) = u.segment<3>(leg_control_offset(j));
  }
  return xdot;
}

/// Typed wrapper with tag checking.
inline HkdState continuous_dynamics(const HkdState& state, const HkdControl& control,
                                    const ContactMode& mode, const RobotParams& params) {
  if (!state.tags_match(mode) || !control.tags_match(mode))
    throw std::invalid_argument("continuous_dynamics: leg tags disagree with contact mode");
  VectorXd xdot = hkd_dynamics(state.pack(), control.pack(), mode, params);
  return HkdState::unpack(xdot, mode);
}

/// Analytic Jacobians A = df/dx (24x24), B = df/du (24x12) of hkd_dynamics.
inline void hkd_dynamics_jacobians(const Eigen::Ref<const VectorXd>& x,
                                   const Eigen::Ref<const VectorXd>& u, const ContactMode& mode,
                                   const RobotParams& params, MatrixXd& A, MatrixXd& B) {
  const Vector3d euler = x.segment<3>(0);
  const Vector3d p = x.segment<3>(3);
  const Vector3d omega = x.segment<3>(6);
  const Matrix3d r = rotation_world_from_body(euler);
  const Matrix3d axes = rotation_rate_axes(euler);
  const Matrix3d inertia_inv = params.body_inertia.inverse();

  A.setZero(kStateDim, kStateDim);
  B.setZero(kStateDim, kControlDim);

  // euler rates (pitch-clamped, consistent with hkd_dynamics)
  const Vector3d euler_c = clamp_pitch(euler);
  Matrix3d dT_droll, dT_dpitch;
  euler_rate_matrix_derivs(euler_c, dT_droll, dT_dpitch);
  A.block<3, 1>(0, 0) = dT_droll * omega;
  A.block<3, 1>(0, 1) = dT_dpitch * omega;
  A.block<3, 3>(0, 6) = euler_rate_matrix(euler_c);

  // com position
  A.block<3, 3>(3, 9) = Matrix3d::Identity();

  // angular acceleration
  Vector3d moment_w = Vector3d::Zero();
  Matrix3d sum_lambda_hat = Matrix3d::Zero();
  for (int j = 0; j < kNumLegs; ++j) {
    if (!mode.stance[j]) continue;
    const Vector3d pf = x.segment<3>(leg_state_offset(j));
    const Vector3d lambda = u.segment<3>(leg_control_offset(j));
    moment_w += (pf - p).cross(lambda);
    sum_lambda_hat += skew(lambda);
    A.block<3, 3>(6, leg_state_offset(j)) = -inertia_inv * r.transpose() * skew(lambda);
    B.block<3, 3>(6, leg_control_offset(j)) = inertia_inv * r.transpose() * skew(pf - p);
    B.block<3, 3>(9, leg_control_offset(j)) = Matrix3d::Identity() / params.mass;
  }
  const Vector3d moment_b = r.transpose() * moment_w;
  for (int i = 0; i < 3; ++i)
    A.block<3, 1>(6, i) = inertia_inv * (-axes.col(i).cross(moment_b));
  A.block<3, 3>(6, 3) = inertia_inv * r.transpose() * sum_lambda_hat;
  A.block<3, 3>(6, 6) =
      inertia_inv * (skew(params.body_inertia * omega) - skew(omega) * params.body_inertia);

  // swing joints
  for (int j = 0; j < kNumLegs; ++j) {
    if (!mode.stance[j])
      B.block<3, 3>(leg_state_offset(j), leg_control_offset(j)) = Matrix3d::Identity();
  }
}

/// Reset map at a contact-mode switch. Legs entering stance capture the
/// world-frame FK of their pre-switch joint angles; legs entering swing
/// restart from the default joint configuration. Identity when no leg
/// switches.
inline HkdState reset_map(const HkdState& state, const ContactMode& from_mode,
                          const ContactMode& to_mode, const RobotParams& params) {
  if (!state.tags_match(from_mode))
    throw std::invalid_argument("reset_map: state tags disagree with from_mode");
  HkdState out = state;
  const Matrix3d r = rotation_world_from_body(state.euler);
  for (int j = 0; j < kNumLegs; ++j) {
    const bool was = from_mode.stance[j], now = to_mode.stance[j];
    if (!was && now) {
      out.legs[j] = LegState::make_stance(
          state.com_pos + r * leg_forward_kinematics(state.legs[j].joints(), j, params));
    } else if (was && !now) {
      out.legs[j] = LegState::make_swing(params.default_swing_q);
    }
  }
  return out;
}

/// Packed-layout reset map and its Jacobian P_x. Joint slots of legs
/// entering swing are set to constants, so their rows are zero.
inline VectorXd reset_map_packed(const Eigen::Ref<const VectorXd>& x, const ContactMode& from_mode,
                                 const ContactMode& to_mode, const RobotParams& params,
                                 MatrixXd* jac = nullptr) {
  const Vector3d euler = x.segment<3>(0);
  const Vector3d p = x.segment<3>(3);
  const Matrix3d r = rotation_world_from_body(euler);
  VectorXd out = x;
  if (jac) jac->setIdentity(kStateDim, kStateDim);
  for (int j = 0; j < kNumLegs; ++j) {
    const bool was = from_mode.stance[j], now = to_mode.stance[j];
    const int off = leg_state_offset(j);
    if (!was && now) {
      const Vector3d q = x.segment<3>(off);
      const Vector3d fk = leg_forward_kinematics(q, j, params);
      out.segment<3>(off) = p + r * fk;
      if (jac) {
        jac->block<3, 24>(off, 0).setZero();
        const Matrix3d axes = rotation_rate_axes(euler);
        for (int i = 0; i < 3; ++i) jac->block<3, 1>(off, i) = r * axes.col(i).cross(fk);
        jac->block<3, 3>(off, 3) = Matrix3d::Identity();
        jac->block<3, 3>(off, off) = r * leg_jacobian(q, j, params);
      }
    } else if (was && !now) {
      out.segment<3>(off) = params.default_swing_q;
      if (jac) jac->block<3, 24>(off, 0).setZero();
    }
  }
  return out;
}

}  // namespace hkd

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

#include <stdexcept>

#include "hkd/core/rotation.hpp"
#include "hkd/core/types.hpp"
#include "hkd/io/config.hpp"
#include "hkd/model/robot_params.hpp"

namespace hkd {

/// Diagonal tracking/regularization weights. Leg-dependent terms are masked
/// by the contact mode: swing legs pay joint tracking, stance legs pay GRF
/// regularization and foot regularization.
struct CostWeights {
  Eigen::Matrix<double, 12, 1> q_body;   // euler(3), pos(3), angvel(3), linvel(3)
  Eigen::Matrix<double, 12, 1> q_joint;  // per joint, swing legs only
  Eigen::Matrix<double, 12, 1> r_grf;    // per GRF component, stance legs only
  double w_foot = 5.0;
  double w_smooth = 1e-2;
  double terminal_scale = 10.0;

  static CostWeights defaults() {
    CostWeights w;
    w.q_body << 10, 10, 30, 50, 50, 80, 1, 1, 1, 5, 5, 10;
    w.q_joint.setConstant(0.1);
    w.r_grf.setConstant(1e-3);
    return w;
  }

  void validate() const {
    if (q_body.minCoeff() < 0 || q_joint.minCoeff() < 0 || r_grf.minCoeff() < 0 || w_foot < 0 ||
        w_smooth < 0 || terminal_scale < 0)
      throw std::invalid_argument("CostWeights: weights must be nonnegative");
    if (!(q_body(5) > 0) || !(q_body(9) > 0) || !(q_body(10) > 0) || !(q_body(11) > 0))
      throw std::invalid_argument("CostWeights: height and body-velocity weights must be > 0");
  }

  static CostWeights from_config(const Config& cfg) {
    CostWeights w = defaults();
    if (cfg.has("cost", "q_body")) {
      auto v = cfg.get_vector("cost", "q_body");
      if (v.size() != 12) throw std::runtime_error("cost.q_body: expected 12 values");
      for (int i = 0; i < 12; ++i) w.q_body(i) = v[i];
    }
    w.q_joint.setConstant(cfg.get_double("cost", "q_joint", 0.1));
    w.r_grf.setConstant(cfg.get_double("cost", "r_grf", 1e-3));
    w.w_foot = cfg.get_double("cost", "w_foot", 5.0);
    w.w_smooth = cfg.get_double("cost", "w_smooth", 1e-2);
    w.terminal_scale = cfg.get_double("cost", "terminal_scale", 10.0);
    w.validate();
    return w;
  }
};

/// Per-node tracking target handed to the cost terms: body reference, swing
/// joint targets, world-frame CoM-to-foot offsets for the stance foot
/// regularization, and the time-aligned control of the previous MPC solution.
struct ReferencePoint {
  Vector3d euler_ref = Vector3d::Zero();
  Vector3d com_ref = Vector3d::Zero();
  Vector3d angvel_ref = Vector3d::Zero();
  Vector3d linvel_ref = Vector3d::Zero();
  LegArray<Vector3d> joint_ref{};
  LegArray<Vector3d> p_rel{};  // world frame
  VectorXd u_prev = VectorXd::Zero(kControlDim);
};

/// World-frame CoM-to-foot target: the nominal hip offset rotated by the
/// reference yaw and dropped to the ground.
inline Vector3d foot_placement_offset(const RobotParams& params, int leg, double yaw_ref,
                                      double height_ref) {
  const Vector3d hip = params.hip_offsets[leg];
  Vector3d rel = rotation_z(yaw_ref) * Vector3d(hip.x(), hip.y(), 0.0);
  rel.z() = -height_ref;
  return rel;
}

namespace detail {

inline Eigen::Matrix<double, 12, 1> body_deviation(const Eigen::Ref<const VectorXd>& x,
                                                   const ReferencePoint& ref) {
  Eigen::Matrix<double, 12, 1> d;
  for (int i = 0; i < 3; ++i) d(i) = wrap_angle(x(i) - ref.euler_ref(i));
  d.segment<3>(3) = x.segment<3>(3) - ref.com_ref;
  d.segment<3>(6) = x.segment<3>(6) - ref.angvel_ref;
  d.segment<3>(9) = x.segment<3>(9) - ref.linvel_ref;
  return d;
}

}  // namespace detail

/// Quadratic running cost (integrand, not yet scaled by dt): body tracking,
/// swing joint tracking, stance GRF regularization, stance foot
/// regularization, and smoothness about the previous solution.
inline double running_cost(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& u,
                           const ContactMode& mode, const ReferencePoint& ref,
                           const CostWeights& w) {
  double cost = 0.0;
  const auto db = detail::body_deviation(x, ref);
  cost += db.cwiseProduct(db).dot(w.q_body);
  for (int j = 0; j < kNumLegs; ++j) {
    const int xo = leg_state_offset(j), uo = leg_control_offset(j);
    if (mode.stance[j]) {
      const Vector3d lambda = u.segment<3>(uo);
      cost += lambda.cwiseProduct(lambda).dot(w.r_grf.segment<3>(uo));
      const Vector3d e = x.segment<3>(xo) - x.segment<3>(3) - ref.p_rel[j];
      cost += w.w_foot * e.squaredNorm();
    } else {
      const Vector3d dq = x.segment<3>(xo) - ref.joint_ref[j];
      cost += dq.cwiseProduct(dq).dot(w.q_joint.segment<3>(uo));
    }
  }
  const VectorXd du = u - ref.u_prev;
  cost += w.w_smooth * du.squaredNorm();
  return cost;
}

/// Terminal cost: running cost without the GRF and smoothness terms, scaled
/// by the terminal multiplier.
inline double terminal_cost(const Eigen::Ref<const VectorXd>& x, const ContactMode& mode,
                            const ReferencePoint& ref, const CostWeights& w) {
  double cost = 0.0;
  const auto db = detail::body_deviation(x, ref);
  cost += db.cwiseProduct(db).dot(w.q_body);
  for (int j = 0; j < kNumLegs; ++j) {
    const int xo = leg_state_offset(j);
    if (mode.stance[j]) {
      const Vector3d e = x.segment<3>(xo) - x.segment<3>(3) - ref.p_rel[j];
      cost += w.w_foot * e.squaredNorm();
    } else {
      const Vector3d dq = x.segment<3>(xo) - ref.joint_ref[j];
      cost += dq.cwiseProduct(dq).dot(w.q_joint.segment<3>(leg_control_offset(j)));
    }
  }
  return w.terminal_scale * cost;
}

/// Exact quadratic expansions of running_cost. l_xx and l_uu are positive
/// semidefinite by construction; there are no state-control cross terms.
inline void running_cost_derivatives(const Eigen::Ref<const VectorXd>& x,
                                     const Eigen::Ref<const VectorXd>& u, const ContactMode& mode,
                                     const ReferencePoint& ref, const CostWeights& w, VectorXd& lx,
                                     VectorXd& lu, MatrixXd& lxx, MatrixXd& luu, MatrixXd& lux) {
  lx.setZero(kStateDim);
  lu.setZero(kControlDim);
  lxx.setZero(kStateDim, kStateDim);
  luu.setZero(kControlDim, kControlDim);
  lux.setZero(kControlDim, kStateDim);

  const auto db = detail::body_deviation(x, ref);
  lx.head<12>() = 2.0 * w.q_body.cwiseProduct(db);
  lxx.topLeftCorner<12, 12>() = (2.0 * w.q_body).asDiagonal();

  for (int j = 0; j < kNumLegs; ++j) {
    const int xo = leg_state_offset(j), uo = leg_control_offset(j);
    if (mode.stance[j]) {
      const Vector3d lambda = u.segment<3>(uo);
      lu.segment<3>(uo) += 2.0 * w.r_grf.segment<3>(uo).cwiseProduct(lambda);
      luu.block<3, 3>(uo, uo) += (2.0 * w.r_grf.segment<3>(uo)).asDiagonal();

      const Vector3d e = x.segment<3>(xo) - x.segment<3>(3) - ref.p_rel[j];
      lx.segment<3>(xo) += 2.0 * w.w_foot * e;
      lx.segment<3>(3) -= 2.0 * w.w_foot * e;
      const Matrix3d h = 2.0 * w.w_foot * Matrix3d::Identity();
      lxx.block<3, 3>(xo, xo) += h;
      lxx.block<3, 3>(3, 3) += h;
      lxx.block<3, 3>(xo, 3) -= h;
      lxx.block<3, 3>(3, xo) -= h;
    } else {
      const Vector3d dq = x.segment<3>(xo) - ref.joint_ref[j];
      lx.segment<3>(xo) += 2.0 * w.q_joint.segment<3>(uo).cwiseProduct(dq);
      lxx.block<3, 3>(xo, xo) += (2.0 * w.q_joint.segment<3>(uo)).asDiagonal();
    }
  }
  lu += 2.0 * w.w_smooth * (u - ref.u_prev);
  luu += 2.0 * w.w_smooth * MatrixXd::Identity(kControlDim, kControlDim);
}

/// Exact quadratic expansion of terminal_cost.
inline void terminal_cost_derivatives(const Eigen::Ref<const VectorXd>& x, const ContactMode& mode,
                                      const ReferencePoint& ref, const CostWeights& w, VectorXd& lx,
                                      MatrixXd& lxx) {
  lx.setZero(kStateDim);
  lxx.setZero(kStateDim, kStateDim);
  const double m = w.terminal_scale;

  const auto db = detail::body_deviation(x, ref);
  lx.head<12>() = 2.0 * m * w.q_body.cwiseProduct(db);
  lxx.topLeftCorner<12, 12>() = (2.0 * m * w.q_body).asDiagonal();

  for (int j = 0; j < kNumLegs; ++j) {
    const int xo = leg_state_offset(j), uo = leg_control_offset(j);
    if (mode.stance[j]) {
      const Vector3d e = x.segment<3>(xo) - x.segment<3>(3) - ref.p_rel[j];
      lx.segment<3>(xo) += 2.0 * m * w.w_foot * e;
      lx.segment<3>(3) -= 2.0 * m * w.w_foot * e;
      const Matrix3d h = 2.0 * m * w.w_foot * Matrix3d::Identity();
      lxx.block<3, 3>(xo, xo) += h;
      lxx.block<3, 3>(3, 3) += h;
      lxx.block<3, 3>(xo, 3) -= h;
      lxx.block<3, 3>(3, xo) -= h;
    } else {
      const Vector3d dq = x.segment<3>(xo) - ref.joint_ref[j];
      lx.segment<3>(xo) += 2.0 * m * w.q_joint.segment<3>(uo).cwiseProduct(dq);
      lxx.block<3, 3>(xo, xo) += (2.0 * m * w.q_joint.segment<3>(uo)).asDiagonal();
    }
  }
}

}  // namespace hkd

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

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hkd {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

inline constexpr int kNumLegs = 4;
inline constexpr int kBodyStateDim = 12;  // euler, pos, angvel, linvel
inline constexpr int kStateDim = 24;      // body + 3 per leg (foothold or joints)
inline constexpr int kControlDim = 12;    // 3 per leg (GRF or joint velocity)
inline constexpr double kGravity = 9.81;  // m/s^2

// Leg order used everywhere: 0 = FL, 1 = FR, 2 = HL, 3 = HR.
enum LegIndex : int { kFL = 0, kFR = 1, kHL = 2, kHR = 3 };

// +1 for left legs, -1 for right legs (ab/ad link points along +/- y).
inline double leg_side_sign(int leg) { return (leg == kFL || leg == kHL) ? 1.0 : -1.0; }

template <typename T>
using LegArray = std::array<T, kNumLegs>;

/// Per-leg stance/swing assignment (contact indicator s_j).
struct ContactMode {
  std::array<bool, kNumLegs> stance{};

  bool operator==(const ContactMode&) const = default;

  int stance_count() const {
    int n = 0;
    for (bool s : stance) n += s;
    return n;
  }

  // Bit i set <=> leg i in stance.
  uint8_t bits() const {
    uint8_t b = 0;
    for (int i = 0; i < kNumLegs; ++i)
      if (stance[i]) b |= uint8_t(1u << i);
    return b;
  }

  static ContactMode from_bits(uint8_t b) {
    ContactMode m;
    for (int i = 0; i < kNumLegs; ++i) m.stance[i] = (b >> i) & 1u;
    return m;
  }

  static ContactMode all_stance() { return from_bits(0xF); }
  static ContactMode all_swing() { return from_bits(0x0); }

  // "1011" style, leg 0 first.
  std::string str() const {
    std::string s(kNumLegs, '0');
    for (int i = 0; i < kNumLegs; ++i)
      if (stance[i]) s[i] = '1';
    return s;
  }
};

/// One leg slot of the hybrid state: world foothold while in stance,
/// joint angles while in swing. The tag must agree with the active
/// ContactMode whenever the two are paired.
struct LegState {
  bool stance = false;
  Vector3d value = Vector3d::Zero();  // p_f (m, world) or q (rad)

  static LegState make_stance(const Vector3d& foothold) { return {true, foothold}; }
  static LegState make_swing(const Vector3d& joints) { return {false, joints}; }

  const Vector3d& foothold() const {
    if (!stance) throw std::logic_error("LegState: foothold() on swing leg");
    return value;
  }
  const Vector3d& joints() const {
    if (stance) throw std::logic_error("LegState: joints() on stance leg");
    return value;
  }
};

/// One leg slot of the hybrid control: world GRF in stance, commanded
/// joint velocity in swing.
struct LegControl {
  bool stance = false;
  Vector3d value = Vector3d::Zero();  // lambda_f (N, world) or u_J (rad/s)

  static LegControl make_stance(const Vector3d& grf) { return {true, grf}; }
  static LegControl make_swing(const Vector3d& joint_vel) { return {false, joint_vel}; }

  const Vector3d& grf() const {
    if (!stance) throw std::logic_error("LegControl: grf() on swing leg");
    return value;
  }
  const Vector3d& joint_vel() const {
    if (stance) throw std::logic_error("LegControl: joint_vel() on swing leg");
    return value;
  }
};

/// Hybrid robot state. euler is (roll, pitch, yaw) for the ZYX
/// (yaw-pitch-roll) convention; ang_vel is body frame, everything else world.
struct HkdState {
  Vector3d euler = Vector3d::Zero();    // rad
  Vector3d com_pos = Vector3d::Zero();  // m, world
  Vector3d ang_vel = Vector3d::Zero();  // rad/s, body frame
  Vector3d lin_vel = Vector3d::Zero();  // m/s, world
  LegArray<LegState> legs{};

  bool tags_match(const ContactMode& mode) const {
    for (int i = 0; i < kNumLegs; ++i)
      if (legs[i].stance != mode.stance[i]) return false;
    return true;
  }

  VectorXd pack() const {
    VectorXd x(kStateDim);
    x.segment<3>(0) = euler;
    x.segment<3>(3) = com_pos;
    x.segment<3>(6) = ang_vel;
    x.segment<3>(9) = lin_vel;
    for (int i = 0; i < kNumLegs; ++i) x.segment<3>(kBodyStateDim + 3 * i) = legs[i].value;
    return x;
  }

  static HkdState unpack(const Eigen::Ref<const VectorXd>& x, const ContactMode& mode) {
    if (x.size() != kStateDim) throw std::invalid_argument("HkdState::unpack: bad size");
    HkdState s;
    s.euler = x.segment<3>(0);
    s.com_pos = x.segment<3>(3);
    s.ang_vel = x.segment<3>(6);
    s.lin_vel = x.segment<3>(9);
    for (int i = 0; i < kNumLegs; ++i)
      s.legs[i] = {mode.stance[i], x.segment<3>(kBodyStateDim + 3 * i)};
    return s;
  }
};

struct HkdControl {
  LegArray<LegControl> legs{};

  bool tags_match(const ContactMode& mode) const {
    for (int i = 0; i < kNumLegs; ++i)
      if (legs[i].stance != mode.stance[i]) return false;
    return true;
  }

  VectorXd pack() const {
    VectorXd u(kControlDim);
    for (int i = 0; i < kNumLegs; ++i) u.segment<3>(3 * i) = legs[i].value;
    return u;
  }

  static HkdControl unpack(const Eigen::Ref<const VectorXd>& u, const ContactMode& mode) {
    if (u.size() != kControlDim) throw std::invalid_argument("HkdControl::unpack: bad size");
    HkdControl c;
    for (int i = 0; i < kNumLegs; ++i) c.legs[i] = {mode.stance[i], u.segment<3>(3 * i)};
    return c;
  }
};

// Slot offsets in the packed layout.
inline int leg_state_offset(int leg) { return kBodyStateDim + 3 * leg; }
inline int leg_control_offset(int leg) { return 3 * leg; }

}  // namespace hkd

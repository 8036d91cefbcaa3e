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

#include "hkd/core/types.hpp"

namespace hkd {

inline constexpr double kPitchSingularityMargin = 1e-3;  // rad from +-pi/2

inline Matrix3d skew(const Vector3d& v) {
  Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

/// Body-to-world rotation for ZYX Euler angles, euler = (roll, pitch, yaw):
/// R = Rz(yaw) * Ry(pitch) * Rx(roll). R maps body-frame vectors to world;
/// R.transpose() maps world to body.
inline Matrix3d rotation_world_from_body(const Vector3d& euler) {
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  const double cy = std::cos(euler.z()), sy = std::sin(euler.z());
  Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,  //
      sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,   //
      -sp, cp * sr, cp * cr;
  return r;
}

inline Matrix3d rotation_z(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

inline bool pitch_near_singularity(double pitch, double margin = kPitchSingularityMargin) {
  return std::abs(std::abs(wrap_angle(pitch)) - M_PI / 2.0) < margin;
}

/// T(theta) with euler_rates = T(theta) * omega_body. Identity at zero
/// angles. Throws when pitch is within 1e-3 rad of +-pi/2 (gimbal lock).
inline Matrix3d euler_rate_matrix(const Vector3d& euler) {
  if (pitch_near_singularity(euler.y()))
    throw std::domain_error("euler_rate_matrix: pitch within 1e-3 of +-pi/2");
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), tp = std::tan(euler.y());
  Matrix3d t;
  t << 1, sr * tp, cr * tp,  //
      0, cr, -sr,            //
      0, sr / cp, cr / cp;
  return t;
}

/// Non-throwing variant for integration paths: pitch is pulled away from the
/// singularity so diverging rollouts stay finite (and get rejected on cost)
/// rather than aborting the solve.
inline Vector3d clamp_pitch(const Vector3d& euler, double margin = 2e-3) {
  Vector3d e = euler;
  double w = wrap_angle(e.y());
  for (double pole : {M_PI / 2.0, -M_PI / 2.0}) {
    const double d = w - pole;
    if (std::abs(d) < margin) {
      w = pole + std::copysign(margin, d == 0.0 ? -pole : d);
      break;
    }
  }
  e.y() = w;
  return e;
}

inline Matrix3d euler_rate_matrix_clamped(const Vector3d& euler) {
  return euler_rate_matrix(clamp_pitch(euler));
}

/// dT/d(roll) and dT/d(pitch); T does not depend on yaw.
inline void euler_rate_matrix_derivs(const Vector3d& euler, Matrix3d& dT_droll,
                                     Matrix3d& dT_dpitch) {
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  const double tp = sp / cp, sec2 = 1.0 / (cp * cp);
  dT_droll << 0, cr * tp, -sr * tp,  //
      0, -sr, -cr,                   //
      0, cr / cp, -sr / cp;
  dT_dpitch << 0, sr * sec2, cr * sec2,  //
      0, 0, 0,                           //
      0, sr * sp * sec2, cr * sp * sec2;
}

/// dR/d(euler_i) = R * skew(b_i); returns the three b_i axes
/// (columns: roll, pitch, yaw) so that d(R v)/d(euler_i) = R (b_i x v).
inline Matrix3d rotation_rate_axes(const Vector3d& euler) {
  const double cr = std::cos(euler.x()), sr = std::sin(euler.x());
  const double cp = std::cos(euler.y()), sp = std::sin(euler.y());
  Matrix3d b;
  b.col(0) = Vector3d::UnitX();                      // Rx' = Rx skew(ex)
  b.col(1) = Vector3d(0, cr, -sr);                   // Rx^T ey
  b.col(2) = Vector3d(-sp, cp * sr, cp * cr);        // Rx^T Ry^T ez
  return b;
}

}  // namespace hkd

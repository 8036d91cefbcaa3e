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
#include <string>
#include <vector>

#include "hkd/core/rotation.hpp"
#include "hkd/model/kinematics.hpp"
#include "hkd/reference/trajectory.hpp"

namespace hkd {

enum class GaitType { kTrot, kPace };

inline GaitType parse_gait(const std::string& name) {
  if (name == "trot") return GaitType::kTrot;
  if (name == "pace") return GaitType::kPace;
  throw std::invalid_argument("unknown gait '" + name + "' (expected trot or pace)");
}

struct GaitSpec {
  GaitType gait = GaitType::kTrot;
  double speed = 0.5;        // m/s, body forward
  double yaw_rate = 0.0;     // rad/s
  double period = 0.4;       // s, full gait cycle
  double duty = 0.5;         // stance fraction
  double duration = 10.0;    // s
  double height = -1.0;      // m; <= 0 means "use the default-q FK height"
};

/// Nominal standing height implied by the default swing configuration.
inline double nominal_stand_height(const RobotParams& params) {
  return -leg_forward_kinematics(params.default_swing_q, kFL, params).z();
}

namespace detail {

// phase offsets within the gait cycle: trot pairs diagonals, pace laterals
inline LegArray<double> gait_offsets(GaitType gait) {
  if (gait == GaitType::kTrot) return {0.0, 0.5, 0.5, 0.0};  // FL, FR, HL, HR
  return {0.0, 0.5, 0.0, 0.5};
}

// closed-form planar body pose under constant forward speed and yaw rate
inline void body_motion(double t, double speed, double yaw_rate, Vector3d& pos_xy_yaw,
                        Vector3d& vel_xy) {
  const double yaw = yaw_rate * t;
  if (std::abs(yaw_rate) < 1e-9) {
    pos_xy_yaw = Vector3d(speed * t, 0.0, yaw);
  } else {
    const double radius = speed / yaw_rate;
    pos_xy_yaw = Vector3d(radius * std::sin(yaw), radius * (1.0 - std::cos(yaw)), yaw);
  }
  vel_xy = Vector3d(speed * std::cos(yaw), speed * std::sin(yaw), 0.0);
}

}  // namespace detail

/// Synthesizes a kinematically consistent 30 Hz roll-out for a periodic
/// gait: commanded planar body motion at constant height, contact flags from
/// the leg phase offsets, and foot placement references under the hip at the
/// middle of each stance window (Raibert placement for constant velocity).
/// Zero commanded motion degenerates to standing on all four legs.
inline std::vector<ReferenceSample> synth_gait(const GaitSpec& spec, const RobotParams& params) {
  if (!(spec.duty > 0.0 && spec.duty < 1.0))
    throw std::invalid_argument("synth_gait: duty must be in (0, 1)");
  if (!(spec.period > 0.0)) throw std::invalid_argument("synth_gait: period must be > 0");
  if (!(spec.duration > 0.0)) throw std::invalid_argument("synth_gait: duration must be > 0");

  const double dt = 1.0 / kRolloutRate;
  const double height = spec.height > 0.0 ? spec.height : nominal_stand_height(params);
  const bool standing = spec.speed == 0.0 && spec.yaw_rate == 0.0;
  const auto offsets = detail::gait_offsets(spec.gait);
  const auto n = size_t(std::llround(spec.duration / dt));

  auto hip_ground_at = [&](double t, int leg) {
    Vector3d pose, vel;
    detail::body_motion(t, spec.speed, spec.yaw_rate, pose, vel);
    const Vector3d hip = rotation_z(pose.z()) * params.hip_offsets[leg];
    return Vector3d(pose.x() + hip.x(), pose.y() + hip.y(), 0.0);
  };

  // flexed swing target: the foot clears the ground instead of grazing it
  const Vector3d swing_q_ref = params.default_swing_q + Vector3d(0.0, -0.15, 0.25);

  std::vector<ReferenceSample> traj;
  traj.reserve(n + 1);
  for (size_t k = 0; k <= n; ++k) {
    const double t = double(k) * dt;
    Vector3d pose, vel;
    detail::body_motion(t, spec.speed, spec.yaw_rate, pose, vel);
    ReferenceSample s;
    s.t = t;
    s.com_pos = Vector3d(pose.x(), pose.y(), height);
    s.com_vel = vel;
    s.euler = Vector3d(0, 0, pose.z());
    s.ang_vel = Vector3d(0, 0, spec.yaw_rate);
    for (int j = 0; j < kNumLegs; ++j) {
      if (standing) {
        s.joint_q[j] = params.default_swing_q;
        s.contact[j] = true;
        s.foot_pos_ref[j] = hip_ground_at(t, j);
        continue;
      }
      // snap the stance/swing edges so 30 Hz sampling does not jitter when
      // the cycle fraction lands on a boundary up to roundoff
      double cycle = t / spec.period + offsets[j];
      if (std::abs(cycle - std::round(cycle)) < 1e-9) cycle = std::round(cycle);
      const double phase = cycle - std::floor(cycle);
      if (std::abs(phase - spec.duty) < 1e-9)
        s.contact[j] = false;  // liftoff edge belongs to swing
      else
        s.contact[j] = phase < spec.duty;
      s.joint_q[j] = s.contact[j] ? params.default_swing_q : swing_q_ref;
      // mid-time of the current (if in stance) or next stance window
      double window_start = (std::floor(cycle) - offsets[j]) * spec.period;
      if (!s.contact[j]) window_start += spec.period;
      s.foot_pos_ref[j] = hip_ground_at(window_start + 0.5 * spec.duty * spec.period, j);
    }
    traj.push_back(s);
  }
  return traj;
}

}  // namespace hkd

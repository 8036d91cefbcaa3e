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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkd/core/rotation.hpp"
#include "hkd/core/types.hpp"

namespace hkd {

inline constexpr double kRolloutRate = 30.0;  // Hz
inline constexpr int kDebounceWindow = 5;     // samples

/// One 30 Hz roll-out sample.
struct ReferenceSample {
  double t = 0.0;
  Vector3d com_pos = Vector3d::Zero();
  Vector3d com_vel = Vector3d::Zero();
  Vector3d euler = Vector3d::Zero();    // roll, pitch, yaw
  Vector3d ang_vel = Vector3d::Zero();  // body frame
  LegArray<Vector3d> joint_q{};
  std::array<bool, kNumLegs> contact{};
  LegArray<Vector3d> foot_pos_ref{};  // world frame
};

/// Ordered contact phases; a phase is a maximal interval of constant mode.
struct ContactSchedule {
  struct Phase {
    ContactMode mode;
    double duration = 0.0;
  };
  std::vector<Phase> phases;

  double total_duration() const {
    double d = 0;
    for (const auto& ph : phases) d += ph.duration;
    return d;
  }
};

using ContactSeries = LegArray<std::vector<uint8_t>>;

namespace detail {

inline const char* kRolloutHeader =
    "t,px,py,pz,vx,vy,vz,roll,pitch,yaw,wx,wy,wz,"
    "q00,q01,q02,q10,q11,q12,q20,q21,q22,q30,q31,q32,"
    "c0,c1,c2,c3,"
    "f0x,f0y,f0z,f1x,f1y,f1z,f2x,f2y,f2z,f3x,f3y,f3z";

inline std::vector<double> split_csv_line(const std::string& line, int lineno,
                                          const std::string& origin) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": bad number '" + tok +
                               "'");
    }
  }
  return vals;
}

}  // namespace detail

inline void validate_rollout(const std::vector<ReferenceSample>& traj) {
  if (traj.empty()) throw std::runtime_error("rollout: empty trajectory");
  double prev_t = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < traj.size(); ++i) {
    const auto& s = traj[i];
    if (!(s.t > prev_t))
      throw std::runtime_error("rollout: timestamps not strictly increasing at sample " +
                               std::to_string(i));
    prev_t = s.t;
    auto finite3 = [](const Vector3d& v) { return v.allFinite(); };
    bool ok = std::isfinite(s.t) && finite3(s.com_pos) && finite3(s.com_vel) && finite3(s.euler) &&
              finite3(s.ang_vel);
    for (int j = 0; j < kNumLegs; ++j) ok = ok && finite3(s.joint_q[j]) && finite3(s.foot_pos_ref[j]);
    if (!ok)
      throw std::runtime_error("rollout: non-finite value at sample " + std::to_string(i));
  }
}

/// Reads a roll-out CSV (header row mandatory, 41 columns, SI units).
inline std::vector<ReferenceSample> load_rollout(std::istream& in,
                                                 const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != detail::kRolloutHeader)
    throw std::runtime_error(origin + ":1: unexpected header row");
  std::vector<ReferenceSample> traj;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto v = detail::split_csv_line(line, lineno, origin);
    if (v.size() != 41)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected 41 columns, got " +
                               std::to_string(v.size()));
    ReferenceSample s;
    s.t = v[0];
    s.com_pos = Vector3d(v[1], v[2], v[3]);
    s.com_vel = Vector3d(v[4], v[5], v[6]);
    s.euler = Vector3d(v[7], v[8], v[9]);
    s.ang_vel = Vector3d(v[10], v[11], v[12]);
    for (int j = 0; j < kNumLegs; ++j)
      s.joint_q[j] = Vector3d(v[13 + 3 * j], v[14 + 3 * j], v[15 + 3 * j]);
    for (int j = 0; j < kNumLegs; ++j) s.contact[j] = v[25 + j] != 0.0;
    for (int j = 0; j < kNumLegs; ++j)
      s.foot_pos_ref[j] = Vector3d(v[29 + 3 * j], v[30 + 3 * j], v[31 + 3 * j]);
    traj.push_back(s);
  }
  validate_rollout(traj);
  return traj;
}

inline std::vector<ReferenceSample> load_rollout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rollout: cannot open " + path);
  return load_rollout(in, path);
}

inline void save_rollout(const std::vector<ReferenceSample>& traj, std::ostream& out) {
  out << detail::kRolloutHeader << "\n";
  out.precision(17);
  for (const auto& s : traj) {
    out << s.t;
    auto put3 = [&](const Vector3d& v) { out << ',' << v.x() << ',' << v.y() << ',' << v.z(); };
    put3(s.com_pos);
    put3(s.com_vel);
    put3(s.euler);
    put3(s.ang_vel);
    for (int j = 0; j < kNumLegs; ++j) put3(s.joint_q[j]);
    for (int j = 0; j < kNumLegs; ++j) out << ',' << (s.contact[j] ? 1 : 0);
    for (int j = 0; j < kNumLegs; ++j) put3(s.foot_pos_ref[j]);
    out << "\n";
  }
}

inline void save_rollout(const std::vector<ReferenceSample>& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("rollout: cannot write " + path);
  save_rollout(traj, out);
}

/// Touchdown debouncing: every raw rising edge opens a five-step window; the
/// contact is kept iff the mean of the raw flags over that window exceeds
/// 0.5, in which case bounce gaps inside the window are filled. Rejected
/// onsets are suppressed entirely. A truncated window is used near the end
/// of the series.
inline std::vector<uint8_t> debounce_contacts(const std::vector<uint8_t>& raw) {
  const size_t n = raw.size();
  std::vector<uint8_t> cleaned(raw);
  size_t i = 0;
  while (i < n) {
    const bool onset = raw[i] && (i == 0 || !raw[i - 1]);
    if (!onset) {
      ++i;
      continue;
    }
    const size_t win_end = std::min(i + size_t(kDebounceWindow), n);
    double mean = 0;
    for (size_t k = i; k < win_end; ++k) mean += raw[k];
    mean /= double(win_end - i);
    if (mean > 0.5) {
      size_t last_contact = i;
      for (size_t k = i; k < win_end; ++k)
        if (raw[k]) last_contact = k;
      for (size_t k = i; k <= last_contact; ++k) cleaned[k] = 1;
      i = last_contact + 1;
    } else {
      size_t k = i;
      while (k < n && raw[k]) {
        cleaned[k] = 0;
        ++k;
      }
      i = k;
    }
  }
  return cleaned;
}

inline ContactSeries debounce_contacts(const ContactSeries& raw) {
  ContactSeries out;
  for (int j = 0; j < kNumLegs; ++j) out[j] = debounce_contacts(raw[j]);
  return out;
}

/// Run-length encodes the per-leg flag series into a contact schedule.
inline ContactSchedule segment_phases(const ContactSeries& flags, double dt) {
  const size_t n = flags[0].size();
  for (int j = 1; j < kNumLegs; ++j)
    if (flags[j].size() != n) throw std::invalid_argument("segment_phases: ragged flag series");
  if (n == 0) throw std::invalid_argument("segment_phases: empty input");
  auto mode_at = [&](size_t k) {
    ContactMode m;
    for (int j = 0; j < kNumLegs; ++j) m.stance[j] = flags[j][k] != 0;
    return m;
  };
  ContactSchedule sched;
  ContactMode cur = mode_at(0);
  size_t run = 1;
  for (size_t k = 1; k < n; ++k) {
    ContactMode m = mode_at(k);
    if (m == cur) {
      ++run;
    } else {
      sched.phases.push_back({cur, double(run) * dt});
      cur = m;
      run = 1;
    }
  }
  sched.phases.push_back({cur, double(run) * dt});
  return sched;
}

/// Inverse of segment_phases on a dt grid (used by the round-trip checks).
inline ContactSeries expand_schedule(const ContactSchedule& sched, double dt) {
  ContactSeries flags;
  for (const auto& ph : sched.phases) {
    const auto steps = size_t(std::llround(ph.duration / dt));
    for (int j = 0; j < kNumLegs; ++j)
      flags[j].insert(flags[j].end(), steps, ph.mode.stance[j] ? 1 : 0);
  }
  return flags;
}

inline void write_schedule(const ContactSchedule& sched, std::ostream& out) {
  out.precision(17);
  for (const auto& ph : sched.phases) out << ph.mode.str() << ' ' << ph.duration << "\n";
}

/// Cross-morphology scaling: horizontal velocities multiplied per axis,
/// height clipped, horizontal positions re-integrated (trapezoid) from the
/// scaled velocities so the tracking targets stay consistent. Foot placement
/// references are translated with the body so they keep their relative
/// placement. Contact flags and timing are untouched.
inline std::vector<ReferenceSample> scale_reference(
    const std::vector<ReferenceSample>& traj, double vel_scale, double height_cap,
    const Vector3d& axis_scale = Vector3d::Ones()) {
  if (!(vel_scale > 0)) throw std::invalid_argument("scale_reference: vel_scale must be > 0");
  if (!(height_cap > 0)) throw std::invalid_argument("scale_reference: height_cap must be > 0");
  std::vector<ReferenceSample> out = traj;
  const Vector3d s(vel_scale * axis_scale.x(), vel_scale * axis_scale.y(), axis_scale.z());
  for (auto& smp : out) {
    smp.com_vel.x() *= s.x();
    smp.com_vel.y() *= s.y();
    smp.com_pos.z() = std::min(smp.com_pos.z(), height_cap);
  }
  for (size_t i = 1; i < out.size(); ++i) {
    const double dt = out[i].t - out[i - 1].t;
    for (int a = 0; a < 2; ++a)
      out[i].com_pos(a) =
          out[i - 1].com_pos(a) + 0.5 * dt * (out[i - 1].com_vel(a) + out[i].com_vel(a));
  }
  for (size_t i = 0; i < out.size(); ++i) {
    const Vector3d shift = out[i].com_pos - traj[i].com_pos;
    for (int j = 0; j < kNumLegs; ++j) {
      out[i].foot_pos_ref[j].x() += shift.x();
      out[i].foot_pos_ref[j].y() += shift.y();
    }
  }
  return out;
}

/// Interpolating view over a validated roll-out. Linear in positions,
/// velocities and joints, shortest-arc in Euler angles, zero-order hold in
/// contacts.
class ReferenceTrajectory {
 public:
  explicit ReferenceTrajectory(std::vector<ReferenceSample> samples)
      : samples_(std::move(samples)) {
    validate_rollout(samples_);
  }

  const std::vector<ReferenceSample>& samples() const { return samples_; }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }

  ReferenceSample at(double t) const {
    if (t < start_time() - 1e-9 || t > end_time() + 1e-9)
      throw std::out_of_range("reference query outside trajectory window");
    t = std::clamp(t, start_time(), end_time());
    const size_t hi = upper_index(t);
    if (hi == 0) return samples_.front();
    const auto& a = samples_[hi - 1];
    const auto& b = samples_[hi];
    if (t == b.t) return b;  // exact at interpolation nodes
    if (t == a.t) return a;
    const double w = (t - a.t) / (b.t - a.t);
    ReferenceSample s;
    s.t = t;
    s.com_pos = (1 - w) * a.com_pos + w * b.com_pos;
    s.com_vel = (1 - w) * a.com_vel + w * b.com_vel;
    s.ang_vel = (1 - w) * a.ang_vel + w * b.ang_vel;
    for (int i = 0; i < 3; ++i)
      s.euler(i) = a.euler(i) + w * wrap_angle(b.euler(i) - a.euler(i));
    for (int j = 0; j < kNumLegs; ++j) {
      s.joint_q[j] = (1 - w) * a.joint_q[j] + w * b.joint_q[j];
      s.foot_pos_ref[j] = (1 - w) * a.foot_pos_ref[j] + w * b.foot_pos_ref[j];
      s.contact[j] = a.contact[j];  // zero-order hold
    }
    return s;
  }

  ContactMode mode_at(double t) const {
    const auto& s = samples_[hold_index(t)];
    ContactMode m;
    for (int j = 0; j < kNumLegs; ++j) m.stance[j] = s.contact[j];
    return m;
  }

  /// Times at which leg j changes contact state (times of the first sample
  /// holding the new state).
  std::vector<double> transition_times(int leg) const {
    std::vector<double> out;
    for (size_t i = 1; i < samples_.size(); ++i)
      if (samples_[i].contact[leg] != samples_[i - 1].contact[leg]) out.push_back(samples_[i].t);
    return out;
  }

  /// Uniform resampling onto a dt grid starting at t0.
  std::vector<ReferenceSample> resample(double t0, double dt, int count) const {
    if (!(dt > 0)) throw std::invalid_argument("resample: dt must be > 0");
    std::vector<ReferenceSample> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) out.push_back(at(t0 + k * dt));
    return out;
  }

  ContactSeries contact_series() const {
    ContactSeries flags;
    for (int j = 0; j < kNumLegs; ++j) {
      flags[j].reserve(samples_.size());
      for (const auto& s : samples_) flags[j].push_back(s.contact[j] ? 1 : 0);
    }
    return flags;
  }

 private:
  // first index with samples_[i].t >= t (clamped to a valid segment end)
  size_t upper_index(double t) const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const ReferenceSample& s, double tt) { return s.t < tt; });
    if (it == samples_.begin()) return 0;
    if (it == samples_.end()) return samples_.size() - 1;
    return size_t(it - samples_.begin());
  }

  // index of the latest sample with t_sample <= t
  size_t hold_index(double t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t + 1e-12,
                               [](double tt, const ReferenceSample& s) { return tt < s.t; });
    if (it == samples_.begin()) return 0;
    return size_t(it - samples_.begin()) - 1;
  }

  std::vector<ReferenceSample> samples_;
};

}  // namespace hkd

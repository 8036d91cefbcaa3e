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

#include <Eigen/Cholesky>

#include <stdexcept>
#include <string>

#include "hkd/core/types.hpp"
#include "hkd/io/config.hpp"

namespace hkd {

/// Morphology parameters of one robot. Loaded from the `[robot]` section of
/// a config file; see configs/ for the shipped Mini-Cheetah-, A1- and
/// Laikago-like sets.
struct RobotParams {
  std::string name = "unnamed";
  double mass = 9.0;                              // kg
  Matrix3d body_inertia = Matrix3d::Identity();   // kg m^2, body frame
  LegArray<Vector3d> hip_offsets{};               // m, body frame, legs FL FR HL HR
  double link_abad = 0.062;                       // l1, m
  double link_upper = 0.209;                      // l2, m
  double link_lower = 0.195;                      // l3, m
  double friction_mu = 0.5;
  Vector3d default_swing_q{0.0, -0.8, 1.8};       // rad

  void validate() const {
    if (!(mass > 0)) throw std::invalid_argument("RobotParams: mass must be > 0");
    if (!(link_abad > 0 && link_upper > 0 && link_lower > 0))
      throw std::invalid_argument("RobotParams: link lengths must be > 0");
    if (!(friction_mu > 0 && friction_mu <= 2.0))
      throw std::invalid_argument("RobotParams: friction_mu must be in (0, 2]");
    if ((body_inertia - body_inertia.transpose()).norm() > 1e-9)
      throw std::invalid_argument("RobotParams: body_inertia must be symmetric");
    Eigen::LLT<Matrix3d> llt(body_inertia);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("RobotParams: body_inertia must be positive definite");
  }

  static RobotParams from_config(const Config& cfg) {
    RobotParams p;
    p.name = cfg.get_string("robot", "name", "unnamed");
    p.mass = cfg.get_double("robot", "mass");
    Vector3d idiag = cfg.get_vec3("robot", "inertia_diag");
    p.body_inertia = idiag.asDiagonal();
    if (cfg.has("robot", "inertia_offdiag")) {
      Vector3d od = cfg.get_vec3("robot", "inertia_offdiag");  // ixy ixz iyz
      p.body_inertia(0, 1) = p.body_inertia(1, 0) = od.x();
      p.body_inertia(0, 2) = p.body_inertia(2, 0) = od.y();
      p.body_inertia(1, 2) = p.body_inertia(2, 1) = od.z();
    }
    p.hip_offsets[kFL] = cfg.get_vec3("robot", "hip_fl");
    p.hip_offsets[kFR] = cfg.get_vec3("robot", "hip_fr");
    p.hip_offsets[kHL] = cfg.get_vec3("robot", "hip_hl");
    p.hip_offsets[kHR] = cfg.get_vec3("robot", "hip_hr");
    auto links = cfg.get_vec3("robot", "link_lengths");
    p.link_abad = links.x();
    p.link_upper = links.y();
    p.link_lower = links.z();
    p.friction_mu = cfg.get_double("robot", "friction_mu");
    p.default_swing_q = cfg.get_vec3("robot", "default_swing_q", Vector3d(0.0, -0.8, 1.8));
    p.validate();
    return p;
  }

  static RobotParams load(const std::string& path) { return from_config(Config::load(path)); }
};

}  // namespace hkd

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

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "hkd/model/dynamics.hpp"
#include "oracles.hpp"

using namespace hkd;

namespace {

RobotParams mini_cheetah_like() {
  RobotParams p;
  p.mass = 9.0;
  p.body_inertia = Vector3d(0.0577, 0.1191, 0.1552).asDiagonal();
  p.hip_offsets = {Vector3d(0.19, 0.049, 0), Vector3d(0.19, -0.049, 0), Vector3d(-0.19, 0.049, 0),
                   Vector3d(-0.19, -0.049, 0)};
  p.link_abad = 0.062;
  p.link_upper = 0.209;
  p.link_lower = 0.195;
  p.friction_mu = 0.5;
  return p;
}

HkdState hover_state(const RobotParams& params, double height = 0.26) {
  HkdState s;
  s.com_pos = Vector3d(0, 0, height);
  for (int j = 0; j < kNumLegs; ++j) {
    Vector3d hip = params.hip_offsets[j];
    s.legs[j] = LegState::make_stance(Vector3d(hip.x(), hip.y(), 0.0));
  }
  return s;
}

HkdControl hover_control(const RobotParams& params) {
  HkdControl c;
  for (int j = 0; j < kNumLegs; ++j)
    c.legs[j] = LegControl::make_stance(Vector3d(0, 0, params.mass * kGravity / 4));
  return c;
}

std::pair<VectorXd, VectorXd> random_state_control(const ContactMode& mode,
                                                   const RobotParams& params, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd x(kStateDim), uc(kControlDim);
  x.segment<3>(0) = Vector3d(0.6 * u(rng), 0.6 * u(rng), 2.0 * u(rng));
  x.segment<3>(3) = Vector3d(u(rng), u(rng), 0.3 + 0.2 * u(rng));
  x.segment<3>(6) = 2.0 * Vector3d(u(rng), u(rng), u(rng));
  x.segment<3>(9) = Vector3d(u(rng), u(rng), u(rng));
  for (int j = 0; j < kNumLegs; ++j) {
    if (mode.stance[j]) {
      x.segment<3>(leg_state_offset(j)) = Vector3d(u(rng), u(rng), 0.05 * u(rng));
      uc.segment<3>(leg_control_offset(j)) = Vector3d(10 * u(rng), 10 * u(rng), 40 + 20 * u(rng));
    } else {
      x.segment<3>(leg_state_offset(j)) = params.default_swing_q + 0.5 * Vector3d(u(rng), u(rng), u(rng));
      uc.segment<3>(leg_control_offset(j)) = 3.0 * Vector3d(u(rng), u(rng), u(rng));
    }
  }
  return {x, uc};
}

}  // namespace

TEST_CASE("hover equilibrium has zero linear and angular acceleration") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_stance();
  HkdState sdot = continuous_dynamics(hover_state(params), hover_control(params), mode, params);
  REQUIRE(sdot.lin_vel.norm() == 0.0);
  REQUIRE(sdot.ang_vel.norm() < 1e-14);
  REQUIRE(sdot.euler.norm() == 0.0);
  for (int j = 0; j < kNumLegs; ++j) REQUIRE(sdot.legs[j].value.norm() == 0.0);
}

TEST_CASE("all-swing dynamics are a free-falling rigid body") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_swing();
  HkdState s;
  s.ang_vel = Vector3d(0.4, -0.2, 0.9);
  s.lin_vel = Vector3d(1, 0, 0.5);
  for (int j = 0; j < kNumLegs; ++j) s.legs[j] = LegState::make_swing(params.default_swing_q);
  HkdControl c;
  for (int j = 0; j < kNumLegs; ++j) c.legs[j] = LegControl::make_swing(Vector3d(0.1, 0.2, -0.3));

  HkdState sdot = continuous_dynamics(s, c, mode, params);
  REQUIRE((sdot.lin_vel - Vector3d(0, 0, -kGravity)).norm() == 0.0);
  Vector3d want_wdot = params.body_inertia.inverse() *
                       (-s.ang_vel.cross(params.body_inertia * s.ang_vel));
  REQUIRE((sdot.ang_vel - want_wdot).norm() < 1e-12);
  for (int j = 0; j < kNumLegs; ++j)
    REQUIRE((sdot.legs[j].value - Vector3d(0.1, 0.2, -0.3)).norm() == 0.0);
}

TEST_CASE("single stance leg produces the frozen cross-product moment") {
  auto params = mini_cheetah_like();
  ContactMode mode;
  mode.stance = {true, false, false, false};
  HkdState s;
  s.euler = Vector3d(0.05, -0.10, 0.30);
  s.com_pos = Vector3d(0.2, 0.1, 0.3);
  Vector3d r_offset(0.12, -0.05, -0.27);
  s.legs[0] = LegState::make_stance(s.com_pos + r_offset);
  for (int j = 1; j < kNumLegs; ++j) s.legs[j] = LegState::make_swing(params.default_swing_q);
  HkdControl c;
  c.legs[0] = LegControl::make_stance(Vector3d(3.0, -2.0, 55.0));
  for (int j = 1; j < kNumLegs; ++j) c.legs[j] = LegControl::make_swing(Vector3d::Zero());

  HkdState sdot = continuous_dynamics(s, c, mode, params);
  // Frozen from an independent by-hand cross-product/matrix oracle.
  Vector3d expected(-92.11793227090217, -51.024490934301994, 4.816403864104842);
  REQUIRE((sdot.ang_vel - expected).norm() < 1e-11);
}

TEST_CASE("tag mismatch raises") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_stance();
  HkdState s = hover_state(params);
  s.legs[2] = LegState::make_swing(params.default_swing_q);
  REQUIRE_THROWS_AS(continuous_dynamics(s, hover_control(params), mode, params),
                    std::invalid_argument);
}

TEST_CASE("stance footholds are constants of the flow") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_stance();
  VectorXd x = hover_state(params).pack();
  x.segment<3>(6) = Vector3d(0.3, 0.1, -0.4);
  VectorXd u = hover_control(params).pack();
  const double dt = 0.011;
  for (int k = 0; k < 50; ++k) x += dt * hkd_dynamics(x, u, mode, params);
  for (int j = 0; j < kNumLegs; ++j) {
    Vector3d hip = params.hip_offsets[j];
    REQUIRE((x.segment<3>(leg_state_offset(j)) - Vector3d(hip.x(), hip.y(), 0)).norm() == 0.0);
  }
}

TEST_CASE("analytic dynamics Jacobians match central finite differences") {
  auto params = mini_cheetah_like();
  std::mt19937 rng(123);
  for (int bits = 0; bits < 16; ++bits) {
    auto mode = ContactMode::from_bits(uint8_t(bits));
    for (int trial = 0; trial < 10; ++trial) {
      auto [x, u] = random_state_control(mode, params, rng);
      if (pitch_near_singularity(x(1), 5e-2)) continue;
      MatrixXd A, B;
      hkd_dynamics_jacobians(x, u, mode, params, A, B);
      auto fx = [&](const VectorXd& xx) { return hkd_dynamics(xx, u, mode, params); };
      auto fu = [&](const VectorXd& uu) { return hkd_dynamics(x, uu, mode, params); };
      REQUIRE(oracle::rel_err(A, oracle::fd_jacobian(fx, x)) < 1e-5);
      REQUIRE(oracle::rel_err(B, oracle::fd_jacobian(fu, u)) < 1e-5);
    }
  }
}

TEST_CASE("hover Jacobian has the identity velocity-to-position block") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_stance();
  MatrixXd A, B;
  hkd_dynamics_jacobians(hover_state(params).pack(), hover_control(params).pack(), mode, params, A,
                         B);
  REQUIRE((A.block<3, 3>(3, 9) - Matrix3d::Identity()).norm() == 0.0);
}

TEST_CASE("all-swing mode zeroes the GRF columns of B") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_swing();
  HkdState s;
  for (int j = 0; j < kNumLegs; ++j) s.legs[j] = LegState::make_swing(params.default_swing_q);
  HkdControl c;
  for (int j = 0; j < kNumLegs; ++j) c.legs[j] = LegControl::make_swing(Vector3d(1, 2, 3));
  MatrixXd A, B;
  hkd_dynamics_jacobians(s.pack(), c.pack(), mode, params, A, B);
  REQUIRE(B.topRows<kBodyStateDim>().norm() == 0.0);
}

TEST_CASE("reset map is the identity when no leg switches") {
  auto params = mini_cheetah_like();
  auto mode = ContactMode::all_stance();
  HkdState s = hover_state(params);
  HkdState r = reset_map(s, mode, mode, params);
  REQUIRE((r.pack() - s.pack()).norm() == 0.0);
  // idempotent: applying twice changes nothing further
  HkdState r2 = reset_map(r, mode, mode, params);
  REQUIRE((r2.pack() - r.pack()).norm() == 0.0);
}

TEST_CASE("swing -> stance captures the world-frame FK foothold") {
  auto params = mini_cheetah_like();
  ContactMode from = ContactMode::from_bits(0b1110);  // leg 0 swings
  ContactMode to = ContactMode::all_stance();
  HkdState s = hover_state(params);
  s.legs[0] = LegState::make_swing(Vector3d(0, -0.8, 1.8));
  HkdState r = reset_map(s, from, to, params);
  Vector3d want = s.com_pos + leg_forward_kinematics(Vector3d(0, -0.8, 1.8), 0, params);
  REQUIRE(r.legs[0].stance);
  REQUIRE((r.legs[0].foothold() - want).norm() < 1e-15);

  SECTION("rotated body rotates the captured foothold") {
    s.euler = Vector3d(0.1, -0.2, 0.7);
    HkdState rr = reset_map(s, from, to, params);
    Vector3d fk = leg_forward_kinematics(Vector3d(0, -0.8, 1.8), 0, params);
    REQUIRE((rr.legs[0].foothold() - (s.com_pos + rotation_world_from_body(s.euler) * fk)).norm() <
            1e-14);
  }
}

TEST_CASE("stance -> swing resets joints to the default configuration") {
  auto params = mini_cheetah_like();
  ContactMode from = ContactMode::all_stance();
  ContactMode to = ContactMode::from_bits(0b1011);  // leg 2 lifts off
  HkdState s = hover_state(params);
  HkdState r = reset_map(s, from, to, params);
  REQUIRE_FALSE(r.legs[2].stance);
  REQUIRE((r.legs[2].joints() - Vector3d(0, -0.8, 1.8)).norm() == 0.0);
  REQUIRE((r.legs[0].foothold() - s.legs[0].foothold()).norm() == 0.0);
}

TEST_CASE("packed reset-map Jacobian matches finite differences") {
  auto params = mini_cheetah_like();
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  ContactMode from = ContactMode::from_bits(0b0110);
  ContactMode to = ContactMode::from_bits(0b1001);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd x = VectorXd::NullaryExpr(kStateDim, [&](Eigen::Index) { return u(rng); });
    MatrixXd jac;
    reset_map_packed(x, from, to, params, &jac);
    auto f = [&](const VectorXd& xx) { return reset_map_packed(xx, from, to, params); };
    REQUIRE(oracle::rel_err(jac, oracle::fd_jacobian(f, x)) < 1e-6);
  }
}

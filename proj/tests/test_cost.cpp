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

#include "hkd/cost/cost.hpp"
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
  return p;
}

// reference point with x exactly on it, lambda = 0, u = u_prev
struct Setup {
  ContactMode mode;
  ReferencePoint ref;
  VectorXd x{kStateDim};
  VectorXd u{kControlDim};
};

Setup nominal_setup(uint8_t bits, unsigned seed = 0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  Setup s;
  s.mode = ContactMode::from_bits(bits);
  s.ref.euler_ref = Vector3d(d(rng), d(rng), d(rng));
  s.ref.com_ref = Vector3d(d(rng), d(rng), 0.3);
  s.ref.angvel_ref = Vector3d(d(rng), d(rng), d(rng));
  s.ref.linvel_ref = Vector3d(d(rng), d(rng), d(rng));
  s.x.segment<3>(0) = s.ref.euler_ref;
  s.x.segment<3>(3) = s.ref.com_ref;
  s.x.segment<3>(6) = s.ref.angvel_ref;
  s.x.segment<3>(9) = s.ref.linvel_ref;
  s.u.setZero();
  for (int j = 0; j < kNumLegs; ++j) {
    if (s.mode.stance[j]) {
      s.ref.p_rel[j] = Vector3d(d(rng), d(rng), -0.3);
      s.x.segment<3>(leg_state_offset(j)) = s.ref.com_ref + s.ref.p_rel[j];
      // re-derive so the residual is exactly zero in floating point
      s.ref.p_rel[j] = s.x.segment<3>(leg_state_offset(j)) - s.ref.com_ref;
    } else {
      s.ref.joint_ref[j] = Vector3d(d(rng), d(rng), d(rng));
      s.x.segment<3>(leg_state_offset(j)) = s.ref.joint_ref[j];
      s.u.segment<3>(leg_control_offset(j)) = Vector3d(d(rng), d(rng), d(rng));
    }
  }
  s.ref.u_prev = s.u;
  return s;
}

}  // namespace

TEST_CASE("running cost vanishes at the reference with zero GRF and u = u_prev") {
  for (uint8_t bits : {uint8_t(0b1111), uint8_t(0b1001), uint8_t(0b0000)}) {
    auto s = nominal_setup(bits, bits);
    REQUIRE(running_cost(s.x, s.u, s.mode, s.ref, CostWeights::defaults()) == 0.0);
    REQUIRE(terminal_cost(s.x, s.mode, s.ref, CostWeights::defaults()) == 0.0);
  }
}

TEST_CASE("a unit height deviation costs exactly the height weight") {
  auto s = nominal_setup(0b1111);
  auto w = CostWeights::defaults();
  // keep the stance feet where they were; only the body moves up by 1
  VectorXd x = s.x;
  x(5) += 1.0;
  double expect = w.q_body(5);
  for (int j = 0; j < kNumLegs; ++j) expect += w.w_foot * 1.0;  // feet now 1 m below target
  REQUIRE(running_cost(x, s.u, s.mode, s.ref, w) == Catch::Approx(expect).epsilon(1e-12));

  // moving the feet with the body isolates the height term
  for (int j = 0; j < kNumLegs; ++j) x(leg_state_offset(j) + 2) += 1.0;
  REQUIRE(running_cost(x, s.u, s.mode, s.ref, w) == Catch::Approx(w.q_body(5)).epsilon(1e-12));
}

TEST_CASE("swing legs pay no GRF cost and stance legs no joint cost") {
  auto w = CostWeights::defaults();
  auto s = nominal_setup(0b0101);
  // perturb swing-leg control slots: only the smoothness term may react
  VectorXd u = s.u;
  for (int j = 0; j < kNumLegs; ++j)
    if (!s.mode.stance[j]) u.segment<3>(leg_control_offset(j)) += Vector3d(5, 5, 5);
  auto w_nosmooth = w;
  w_nosmooth.w_smooth = 0.0;
  REQUIRE(running_cost(u.isApprox(s.u) ? s.x : s.x, u, s.mode, s.ref, w_nosmooth) == 0.0);

  // perturbing a stance leg's slot changes only the foot term, not joint tracking
  auto w_nofoot = w;
  w_nofoot.w_foot = 0.0;
  VectorXd x = s.x;
  for (int j = 0; j < kNumLegs; ++j)
    if (s.mode.stance[j]) x.segment<3>(leg_state_offset(j)) += Vector3d(0.2, 0.2, 0.2);
  REQUIRE(running_cost(x, s.u, s.mode, s.ref, w_nofoot) == 0.0);
}

TEST_CASE("cost gradients and Hessians match finite differences") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  auto w = CostWeights::defaults();
  for (int trial = 0; trial < 40; ++trial) {
    auto s = nominal_setup(uint8_t(trial % 16), unsigned(trial));
    VectorXd x = s.x + VectorXd::NullaryExpr(kStateDim, [&](Eigen::Index) { return d(rng); });
    VectorXd u = s.u + VectorXd::NullaryExpr(kControlDim, [&](Eigen::Index) { return d(rng); });

    VectorXd lx, lu;
    MatrixXd lxx, luu, lux;
    running_cost_derivatives(x, u, s.mode, s.ref, w, lx, lu, lxx, luu, lux);

    auto fx = [&](const VectorXd& xx) { return running_cost(xx, u, s.mode, s.ref, w); };
    auto fu = [&](const VectorXd& uu) { return running_cost(x, uu, s.mode, s.ref, w); };
    REQUIRE(oracle::rel_err(lx, oracle::fd_gradient(fx, x)) < 1e-6);
    REQUIRE(oracle::rel_err(lu, oracle::fd_gradient(fu, u)) < 1e-6);

    auto gx = [&](const VectorXd& xx) -> VectorXd {
      VectorXd ax, au;
      MatrixXd axx, auu, aux;
      running_cost_derivatives(xx, u, s.mode, s.ref, w, ax, au, axx, auu, aux);
      return ax;
    };
    auto gu = [&](const VectorXd& uu) -> VectorXd {
      VectorXd ax, au;
      MatrixXd axx, auu, aux;
      running_cost_derivatives(x, uu, s.mode, s.ref, w, ax, au, axx, auu, aux);
      return au;
    };
    REQUIRE(oracle::rel_err(lxx, oracle::fd_jacobian(gx, x)) < 1e-6);
    REQUIRE(oracle::rel_err(luu, oracle::fd_jacobian(gu, u)) < 1e-6);
    REQUIRE(lux.norm() == 0.0);

    VectorXd tx;
    MatrixXd txx;
    terminal_cost_derivatives(x, s.mode, s.ref, w, tx, txx);
    auto ft = [&](const VectorXd& xx) { return terminal_cost(xx, s.mode, s.ref, w); };
    REQUIRE(oracle::rel_err(tx, oracle::fd_gradient(ft, x)) < 1e-6);
  }
}

TEST_CASE("expansions are exact for the quadratic terms") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  auto w = CostWeights::defaults();
  auto s = nominal_setup(0b0110, 9);
  VectorXd x = s.x, u = s.u;
  VectorXd lx, lu;
  MatrixXd lxx, luu, lux;
  running_cost_derivatives(x, u, s.mode, s.ref, w, lx, lu, lxx, luu, lux);
  const double l0 = running_cost(x, u, s.mode, s.ref, w);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd dx = VectorXd::NullaryExpr(kStateDim, [&](Eigen::Index) { return d(rng); });
    VectorXd du = VectorXd::NullaryExpr(kControlDim, [&](Eigen::Index) { return d(rng); });
    const double taylor = l0 + lx.dot(dx) + lu.dot(du) + 0.5 * dx.dot(lxx * dx) +
                          0.5 * du.dot(luu * du) + du.dot(lux * dx);
    const double actual = running_cost(x + dx, u + du, s.mode, s.ref, w);
    REQUIRE(actual == Catch::Approx(taylor).epsilon(1e-12));
  }
}

TEST_CASE("gradient is zero on tracking terms at the reference point") {
  auto s = nominal_setup(0b1010, 3);
  auto w = CostWeights::defaults();
  VectorXd lx, lu;
  MatrixXd lxx, luu, lux;
  running_cost_derivatives(s.x, s.u, s.mode, s.ref, w, lx, lu, lxx, luu, lux);
  REQUIRE(lx.norm() == 0.0);
  REQUIRE(lu.norm() == 0.0);
}

TEST_CASE("terminal multiplier of zero kills the terminal cost") {
  auto s = nominal_setup(0b1111, 4);
  auto w = CostWeights::defaults();
  w.terminal_scale = 0.0;
  VectorXd x = s.x;
  x.segment<3>(3) += Vector3d(5, 5, 5);
  REQUIRE(terminal_cost(x, s.mode, s.ref, w) == 0.0);
}

TEST_CASE("masked weights zero the matching rows and columns") {
  auto s = nominal_setup(0b0011, 8);
  auto w = CostWeights::defaults();
  w.w_foot = 0.0;
  w.w_smooth = 0.0;
  VectorXd lx, lu;
  MatrixXd lxx, luu, lux;
  running_cost_derivatives(s.x, s.u, s.mode, s.ref, w, lx, lu, lxx, luu, lux);
  for (int j = 0; j < kNumLegs; ++j) {
    if (s.mode.stance[j]) {
      // foothold slots only enter through w_foot
      REQUIRE(lxx.block<3, 24>(leg_state_offset(j), 0).norm() == 0.0);
    } else {
      // swing GRF slots only enter through smoothness
      REQUIRE(luu.block<3, 12>(leg_control_offset(j), 0).norm() == 0.0);
    }
  }
}

TEST_CASE("foot_placement_offset rotates the hip and drops to the ground") {
  auto params = mini_cheetah_like();
  Vector3d rel = foot_placement_offset(params, kFL, M_PI / 2, 0.3);
  REQUIRE(rel.x() == Catch::Approx(-0.049).margin(1e-12));
  REQUIRE(rel.y() == Catch::Approx(0.19).margin(1e-12));
  REQUIRE(rel.z() == Catch::Approx(-0.3).margin(1e-15));
}

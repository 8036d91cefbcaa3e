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
#include <sstream>

#include "hkd/cost/cost.hpp"
#include "hkd/io/config.hpp"
#include "hkd/model/robot_params.hpp"

using namespace hkd;

TEST_CASE("config parses sections, scalars, vectors and comments") {
  std::istringstream in(R"(
# robot morphology
[robot]
mass = 9.0            # kg
inertia_diag = 0.05 0.11 0.15
name = testbot

[solver]
max_iterations = 3
)");
  auto cfg = Config::parse(in, "test.cfg");
  REQUIRE(cfg.get_double("robot", "mass") == 9.0);
  REQUIRE(cfg.get_string("robot", "name") == "testbot");
  REQUIRE(cfg.get_vec3("robot", "inertia_diag") == Vector3d(0.05, 0.11, 0.15));
  REQUIRE(cfg.get_int("solver", "max_iterations") == 3);
  REQUIRE(cfg.get_double("solver", "missing", 1.5) == 1.5);
  REQUIRE_THROWS_WITH(cfg.get_double("solver", "missing"),
                      Catch::Matchers::ContainsSubstring("missing"));
}

TEST_CASE("config rejects malformed lines") {
  std::istringstream bad1("[robot\nmass = 1");
  REQUIRE_THROWS_AS(Config::parse(bad1), std::runtime_error);
  std::istringstream bad2("[robot]\njust a line");
  REQUIRE_THROWS_AS(Config::parse(bad2), std::runtime_error);
  std::istringstream bad3("[robot]\nmass = not_a_number");
  auto cfg = Config::parse(bad3);
  REQUIRE_THROWS_AS(cfg.get_double("robot", "mass"), std::runtime_error);
}

static const char* kRobotText = R"(
[robot]
name = mini_cheetah_like
mass = 9.0
inertia_diag = 0.0577 0.1191 0.1552
hip_fl =  0.19  0.049 0
hip_fr =  0.19 -0.049 0
hip_hl = -0.19  0.049 0
hip_hr = -0.19 -0.049 0
link_lengths = 0.062 0.209 0.195
friction_mu = 0.5
)";

TEST_CASE("RobotParams loads from config and validates") {
  std::istringstream in(kRobotText);
  auto params = RobotParams::from_config(Config::parse(in));
  REQUIRE(params.mass == 9.0);
  REQUIRE(params.hip_offsets[kHR] == Vector3d(-0.19, -0.049, 0));
  REQUIRE(params.default_swing_q == Vector3d(0, -0.8, 1.8));

  SECTION("invalid friction is rejected") {
    params.friction_mu = 2.5;
    REQUIRE_THROWS_AS(params.validate(), std::invalid_argument);
  }
  SECTION("non-positive-definite inertia is rejected") {
    params.body_inertia = Vector3d(-1, 1, 1).asDiagonal();
    REQUIRE_THROWS_AS(params.validate(), std::invalid_argument);
  }
}

TEST_CASE("the shipped robot configs load") {
  for (const char* name : {"mini_cheetah.cfg", "a1.cfg", "laikago.cfg"}) {
    auto params = RobotParams::load(std::string(HKD_CONFIG_DIR) + "/" + name);
    REQUIRE(params.mass > 0);
  }
  auto mc = RobotParams::load(std::string(HKD_CONFIG_DIR) + "/mini_cheetah.cfg");
  REQUIRE(mc.mass == 9.0);
  auto a1 = RobotParams::load(std::string(HKD_CONFIG_DIR) + "/a1.cfg");
  REQUIRE(a1.mass == 12.7);
  auto lk = RobotParams::load(std::string(HKD_CONFIG_DIR) + "/laikago.cfg");
  REQUIRE(lk.mass == 22.0);
}

TEST_CASE("CostWeights defaults and config override") {
  auto w = CostWeights::defaults();
  w.validate();
  REQUIRE(w.q_body(5) == 80);

  std::istringstream in("[cost]\nq_joint = 0.2\nw_foot = 3\n");
  auto w2 = CostWeights::from_config(Config::parse(in));
  REQUIRE(w2.q_joint(0) == 0.2);
  REQUIRE(w2.w_foot == 3);
  REQUIRE(w2.q_body(0) == 10);  // untouched default

  SECTION("zero height weight is rejected") {
    std::istringstream bad("[cost]\nq_body = 10 10 30 50 50 0 1 1 1 5 5 10\n");
    REQUIRE_THROWS_AS(CostWeights::from_config(Config::parse(bad)), std::invalid_argument);
  }
}

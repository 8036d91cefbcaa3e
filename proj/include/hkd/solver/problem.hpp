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
#include <functional>
#include <stdexcept>
#include <vector>

#include "hkd/core/types.hpp"
#include "hkd/io/config.hpp"

namespace hkd::ddp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relaxed logarithmic barrier: -w ln(z) above delta, quadratically
/// extended below so the penalty is C2 and defined everywhere.
struct RelaxedBarrier {
  double delta = 0.01;
  double weight = 10.0;

  double value(double z) const {
    if (z > delta) return -weight * std::log(z);
    const double r = (z - 2.0 * delta) / delta;
    return weight * (0.5 * (r * r - 1.0) - std::log(delta));
  }
  double d1(double z) const {
    if (z > delta) return -weight / z;
    return weight * (z - 2.0 * delta) / (delta * delta);
  }
  double d2(double z) const {
    if (z > delta) return weight / (z * z);
    return weight / (delta * delta);
  }
};

struct SolverConfig {
  double dt = 0.011;      // forward Euler step, s
  double horizon = 0.462; // planning horizon, s
  int max_iterations = 3;
  double line_search_backtrack = 0.5;
  double line_search_min_step = 1.0 / 64.0;
  double reg_init = 1e-6;
  double reg_growth = 10.0;
  double reg_shrink = 0.5;
  double reg_max = 1e8;
  double al_penalty_init = 10.0;
  double al_penalty_growth = 10.0;
  double al_penalty_max = 1e6;
  double reb_delta = 0.01;
  double reb_weight = 0.1;
  double convergence_tol = 1e-7;  // on the expected decrease at full step

  int nodes() const { return int(std::lround(horizon / dt)); }

  void validate() const {
    if (!(dt > 0) || !(horizon > 0)) throw std::invalid_argument("SolverConfig: dt, horizon > 0");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations >= 1");
  }

  static SolverConfig from_config(const Config& cfg) {
    SolverConfig c;
    c.dt = cfg.get_double("solver", "dt", c.dt);
    c.horizon = cfg.get_double("solver", "horizon", c.horizon);
    c.max_iterations = cfg.get_int("solver", "max_iterations", c.max_iterations);
    c.line_search_backtrack = cfg.get_double("solver", "line_search_backtrack", c.line_search_backtrack);
    c.line_search_min_step = cfg.get_double("solver", "line_search_min_step", c.line_search_min_step);
    c.reg_init = cfg.get_double("solver", "reg_init", c.reg_init);
    c.reg_growth = cfg.get_double("solver", "reg_growth", c.reg_growth);
    c.reg_shrink = cfg.get_double("solver", "reg_shrink", c.reg_shrink);
    c.reg_max = cfg.get_double("solver", "reg_max", c.reg_max);
    c.al_penalty_init = cfg.get_double("solver", "al_penalty_init", c.al_penalty_init);
    c.al_penalty_growth = cfg.get_double("solver", "al_penalty_growth", c.al_penalty_growth);
    c.al_penalty_max = cfg.get_double("solver", "al_penalty_max", c.al_penalty_max);
    c.reb_delta = cfg.get_double("solver", "reb_delta", c.reb_delta);
    c.reb_weight = cfg.get_double("solver", "reb_weight", c.reb_weight);
    c.convergence_tol = cfg.get_double("solver", "convergence_tol", c.convergence_tol);
    c.validate();
    return c;
  }
};

/// One phase of the multi-phase problem: continuous dynamics, running cost
/// integrand, optional terminal cost, path inequalities g >= 0 (relaxed
/// barrier), terminal equalities h = 0 (augmented Lagrangian) and the reset
/// map into the next phase. Node indices passed to the callbacks are local
/// to the phase.
struct Phase {
  int node_count = 0;
  double dt = 0.011;
  ContactMode mode;  // tag carried through for consumers; unused by the solver core

  std::function<VectorXd(int k, const VectorXd& x, const VectorXd& u)> dynamics;
  std::function<void(int k, const VectorXd& x, const VectorXd& u, MatrixXd& A, MatrixXd& B)>
      dynamics_jacobians;

  std::function<double(int k, const VectorXd& x, const VectorXd& u)> running_cost;
  std::function<void(int k, const VectorXd& x, const VectorXd& u, VectorXd& lx, VectorXd& lu,
                     MatrixXd& lxx, MatrixXd& luu, MatrixXd& lux)>
      running_cost_expansion;

  // terminal cost on this phase's end state (normally the last phase only)
  std::function<double(const VectorXd& x)> terminal_cost;
  std::function<void(const VectorXd& x, VectorXd& lx, MatrixXd& lxx)> terminal_cost_expansion;

  // vector-valued g(k, x, u) >= 0 with Jacobians, applied at nodes 0..N-1
  std::function<VectorXd(int k, const VectorXd& x, const VectorXd& u)> inequality;
  std::function<void(int k, const VectorXd& x, const VectorXd& u, MatrixXd& gx, MatrixXd& gu)>
      inequality_jacobians;

  // vector-valued h(x_end) = 0 with Jacobian rows
  std::function<VectorXd(const VectorXd& x)> boundary_eq;
  std::function<MatrixXd(const VectorXd& x)> boundary_eq_jacobian;

  // x_next_phase_start = reset(x_end); identity when absent
  std::function<VectorXd(const VectorXd& x, MatrixXd* jac)> reset;

  // nominal control used for cold starts and re-tagged warm-start nodes
  std::function<VectorXd(int k)> initial_control;
};

struct ProblemSet {
  int state_dim = 0;
  int control_dim = 0;
  std::vector<Phase> phases;

  int total_nodes() const {
    int n = 0;
    for (const auto& ph : phases) n += ph.node_count;
    return n;
  }

  void validate() const {
    if (phases.empty()) throw std::invalid_argument("ProblemSet: no phases");
    if (state_dim <= 0 || control_dim <= 0)
      throw std::invalid_argument("ProblemSet: dimensions not set");
    for (const auto& ph : phases) {
      if (ph.node_count < 1) throw std::invalid_argument("ProblemSet: phase with node_count < 1");
      if (!(ph.dt > 0)) throw std::invalid_argument("ProblemSet: phase with dt <= 0");
      if (!ph.dynamics || !ph.dynamics_jacobians || !ph.running_cost || !ph.running_cost_expansion)
        throw std::invalid_argument("ProblemSet: phase missing dynamics or cost callbacks");
    }
  }
};

/// Forward-Euler discretization: x+ = x + dt f(x, u), A_d = I + dt A,
/// B_d = dt B.
inline VectorXd discretize_step(const Phase& ph, int k, const VectorXd& x, const VectorXd& u) {
  return x + ph.dt * ph.dynamics(k, x, u);
}

inline void discretize_jacobians(const Phase& ph, int k, const VectorXd& x, const VectorXd& u,
                                 MatrixXd& Ad, MatrixXd& Bd) {
  ph.dynamics_jacobians(k, x, u, Ad, Bd);
  Ad = MatrixXd::Identity(x.size(), x.size()) + ph.dt * Ad;
  Bd *= ph.dt;
}

}  // namespace hkd::ddp

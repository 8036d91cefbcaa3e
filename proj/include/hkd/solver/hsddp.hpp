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

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hkd/solver/problem.hpp"

namespace hkd::ddp {

struct IterationStat {
  int iteration = 0;
  double cost = 0.0;    // raw running + terminal cost
  double merit = 0.0;   // cost + barrier penalties + AL terms, before the step
  double merit_after = 0.0;  // after the accepted step, same duals
  double expected_decrease = 0.0;
  double step_size = 0.0;
  double regularization = 0.0;
  bool accepted = false;
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;
};

/// Multi-phase trajectory plus the DDP byproducts. Gains correspond to the
/// last backward pass on the returned nominal trajectory.
struct Solution {
  struct PhaseData {
    ContactMode mode;
    int node_count = 0;
    double dt = 0.0;
    std::vector<VectorXd> x;    // node_count + 1 states
    std::vector<VectorXd> u;    // node_count controls
    std::vector<VectorXd> kff;  // feedforward steps (diagnostic)
    std::vector<MatrixXd> K;    // feedback gains
  };

  double t0 = 0.0;  // absolute time of the first node, set by the caller
  std::vector<PhaseData> phases;
  std::vector<VectorXd> al_multipliers;   // per phase boundary
  std::vector<double> al_penalty;         // per phase boundary
  std::vector<double> al_prev_residual;   // safeguard state for dual updates

  double cost = 0.0;
  double merit = 0.0;
  int iterations = 0;       // accepted forward passes
  int backward_passes = 0;
  bool solver_failure = false;
  std::string failure_reason;
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;  // most negative g, reported positive
  std::vector<IterationStat> trace;

  int total_nodes() const {
    int n = 0;
    for (const auto& ph : phases) n += ph.node_count;
    return n;
  }

  /// Flattened per-control-node view (timestamps strictly increasing).
  struct Node {
    double t;
    ContactMode mode;
    VectorXd x;
    VectorXd u;
    MatrixXd K;
  };
  std::vector<Node> flatten() const {
    std::vector<Node> out;
    double t = t0;
    for (const auto& ph : phases) {
      for (int k = 0; k < ph.node_count; ++k) {
        Node n;
        n.t = t;
        n.mode = ph.mode;
        n.x = ph.x[size_t(k)];
        n.u = ph.u[size_t(k)];
        n.K = k < int(ph.K.size()) ? ph.K[size_t(k)] : MatrixXd();
        out.push_back(std::move(n));
        t += ph.dt;
      }
    }
    return out;
  }

  const VectorXd& final_state() const { return phases.back().x.back(); }
};

class HsddpSolver {
 public:
  explicit HsddpSolver(SolverConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const SolverConfig& config() const { return cfg_; }

  /// Solves the multi-phase problem from x0. The warm start provides the
  /// initial control trajectory and the persisted AL duals; its states are
  /// re-derived by rollout so the nominal is always dynamics-consistent.
  Solution solve(const ProblemSet& prob, const VectorXd& x0,
                 const Solution* warm_start = nullptr) const {
    prob.validate();
    const size_t np = prob.phases.size();

    Solution sol;
    sol.phases.resize(np);
    for (size_t i = 0; i < np; ++i) {
      sol.phases[i].mode = prob.phases[i].mode;
      sol.phases[i].node_count = prob.phases[i].node_count;
      sol.phases[i].dt = prob.phases[i].dt;
    }

    // duals: take over from the warm start when the phase layout matches
    sol.al_multipliers.assign(np, VectorXd());
    sol.al_penalty.assign(np, cfg_.al_penalty_init);
    sol.al_prev_residual.assign(np, std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < np; ++i) {
      const int nc = prob.phases[i].boundary_eq
                         ? int(prob.phases[i].boundary_eq(VectorXd::Zero(prob.state_dim)).size())
                         : 0;
      sol.al_multipliers[i] = VectorXd::Zero(nc);
      if (warm_start && i < warm_start->al_multipliers.size() &&
          warm_start->al_multipliers[i].size() == nc) {
        sol.al_multipliers[i] = warm_start->al_multipliers[i];
        sol.al_penalty[i] = warm_start->al_penalty[i];
        if (i < warm_start->al_prev_residual.size())
          sol.al_prev_residual[i] = warm_start->al_prev_residual[i];
      }
    }

    // initial controls
    std::vector<std::vector<VectorXd>> u0(np);
    for (size_t i = 0; i < np; ++i) {
      u0[i].resize(size_t(prob.phases[i].node_count));
      for (int k = 0; k < prob.phases[i].node_count; ++k) {
        if (warm_start && i < warm_start->phases.size() &&
            k < int(warm_start->phases[i].u.size()) &&
            warm_start->phases[i].u[size_t(k)].size() == prob.control_dim) {
          u0[i][size_t(k)] = warm_start->phases[i].u[size_t(k)];
        } else if (prob.phases[i].initial_control) {
          u0[i][size_t(k)] = prob.phases[i].initial_control(k);
        } else {
          u0[i][size_t(k)] = VectorXd::Zero(prob.control_dim);
        }
      }
    }

    // nominal rollout
    if (!rollout_open_loop(prob, x0, u0, sol)) {
      sol.solver_failure = true;
      sol.failure_reason = "initial rollout diverged";
      return sol;
    }
    evaluate(prob, sol);

    double reg = cfg_.reg_init;
    Backward bw;
    for (int iter = 1; iter <= cfg_.max_iterations; ++iter) {
      // backward pass with regularization escalation
      bool ok = false;
      while (true) {
        ok = backward_pass(prob, sol, reg, bw);
        ++sol.backward_passes;
        if (ok) break;
        reg = std::max(reg * cfg_.reg_growth, cfg_.reg_init);
        if (reg > cfg_.reg_max) {
          sol.solver_failure = true;
          sol.failure_reason = "backward pass not positive definite at maximum regularization";
          return sol;
        }
      }
      store_gains(bw, sol);

      IterationStat stat;
      stat.iteration = iter;
      stat.regularization = reg;
      stat.expected_decrease = -(bw.dv1 + bw.dv2);
      stat.cost = sol.cost;
      stat.merit = sol.merit;
      stat.merit_after = sol.merit;
      stat.max_eq_residual = sol.max_eq_residual;
      stat.max_ineq_violation = sol.max_ineq_violation;

      if (std::abs(stat.expected_decrease) < cfg_.convergence_tol) {
        sol.trace.push_back(stat);
        break;  // converged at the current nominal
      }

      // backtracking line search accepting any merit decrease
      bool accepted = false;
      Solution candidate;
      for (double alpha = 1.0; alpha >= cfg_.line_search_min_step;
           alpha *= cfg_.line_search_backtrack) {
        candidate = sol;
        if (!forward_pass(prob, sol, bw, alpha, candidate)) continue;
        evaluate(prob, candidate);
        if (candidate.merit < sol.merit) {
          stat.step_size = alpha;
          stat.merit_after = candidate.merit;
          accepted = true;
          break;
        }
      }

      if (accepted) {
        candidate.trace = sol.trace;
        candidate.backward_passes = sol.backward_passes;
        candidate.iterations = sol.iterations + 1;
        store_gains(bw, candidate);
        sol = std::move(candidate);
        reg = std::max(reg * cfg_.reg_shrink, 1e-12);
      }
      stat.accepted = accepted;
      sol.trace.push_back(stat);
      if (!accepted) break;  // no progress at the smallest step

      // safeguarded dual update so constraints tighten across iterations
      // (and across MPC replans, since duals ride along in the Solution).
      // Updates only fire once the primal has roughly converged on the
      // current AL subproblem; multipliers move when the residual improved
      // enough, otherwise the penalty escalates.
      const bool primal_settled =
          stat.expected_decrease < 0.05 * std::max(1.0, std::abs(sol.cost));
      if (primal_settled) {
        for (size_t i = 0; i < np; ++i) {
          if (sol.al_multipliers[i].size() == 0) continue;
          const VectorXd h = prob.phases[i].boundary_eq(sol.phases[i].x.back());
          const double hinf = h.lpNorm<Eigen::Infinity>();
          if (hinf <= 0.25 * sol.al_prev_residual[i]) {
            sol.al_multipliers[i] += sol.al_penalty[i] * h;
            sol.al_prev_residual[i] = hinf;
          } else {
            sol.al_penalty[i] = std::min(sol.al_penalty[i] * cfg_.al_penalty_growth,
                                         cfg_.al_penalty_max);
          }
        }
        evaluate(prob, sol);  // merit under the updated duals
      }
    }
    return sol;
  }

  /// Time-shifts a previous solution onto a new problem window. Controls are
  /// re-sampled zero-order-hold at the new node times; legs whose stance tag
  /// changed fall back to the phase's initial control; the tail holds the
  /// last control. States are re-derived by rollout from x0. Returns nothing
  /// when the shift exceeds the horizon (cold start).
  std::optional<Solution> shift_warm_start(const Solution& prev, double elapsed,
                                           const ProblemSet& prob, const VectorXd& x0) const {
    if (elapsed < 0) throw std::invalid_argument("shift_warm_start: elapsed must be >= 0");
    const double prev_span = prev.total_nodes() > 0 ? prev.phases.back().dt * prev.total_nodes() : 0;
    if (elapsed >= prev_span) return std::nullopt;

    const auto nodes = prev.flatten();
    auto control_at = [&](double t_rel, const ContactMode& want_mode,
                          const Phase& ph, int k_local) -> VectorXd {
      // latest previous node not after t_rel (+ half grid tolerance)
      const double t_abs = prev.t0 + elapsed + t_rel;
      size_t idx = 0;
      for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].t <= t_abs + 0.5 * ph.dt) idx = i;
      VectorXd u = nodes[idx].u;
      if (!(nodes[idx].mode == want_mode)) {
        const VectorXd fallback =
            ph.initial_control ? ph.initial_control(k_local) : VectorXd::Zero(u.size());
        for (int j = 0; j < kNumLegs; ++j)
          if (nodes[idx].mode.stance[j] != want_mode.stance[j])
            u.segment<3>(3 * j) = fallback.segment<3>(3 * j);
      }
      return u;
    };

    Solution shifted;
    shifted.t0 = prev.t0 + elapsed;
    shifted.phases.resize(prob.phases.size());
    std::vector<std::vector<VectorXd>> u0(prob.phases.size());
    double t_rel = 0;
    for (size_t i = 0; i < prob.phases.size(); ++i) {
      const auto& ph = prob.phases[i];
      shifted.phases[i].mode = ph.mode;
      shifted.phases[i].node_count = ph.node_count;
      shifted.phases[i].dt = ph.dt;
      u0[i].resize(size_t(ph.node_count));
      for (int k = 0; k < ph.node_count; ++k) {
        u0[i][size_t(k)] = control_at(t_rel, ph.mode, ph, k);
        t_rel += ph.dt;
      }
    }
    if (!rollout_open_loop(prob, x0, u0, shifted)) return std::nullopt;

    // carry duals for boundaries that survive the shift (matched by time)
    shifted.al_multipliers.assign(prob.phases.size(), VectorXd());
    shifted.al_penalty.assign(prob.phases.size(), cfg_.al_penalty_init);
    shifted.al_prev_residual.assign(prob.phases.size(), std::numeric_limits<double>::infinity());
    std::vector<double> prev_bounds;  // absolute boundary times of prev
    {
      double t = prev.t0;
      for (size_t i = 0; i + 1 < prev.phases.size(); ++i) {
        t += prev.phases[i].dt * prev.phases[i].node_count;
        prev_bounds.push_back(t);
      }
    }
    double t_abs = shifted.t0;
    for (size_t i = 0; i < prob.phases.size(); ++i) {
      t_abs += prob.phases[i].dt * prob.phases[i].node_count;
      const int nc = prob.phases[i].boundary_eq
                         ? int(prob.phases[i].boundary_eq(shifted.phases[i].x.back()).size())
                         : 0;
      shifted.al_multipliers[i] = VectorXd::Zero(nc);
      if (i + 1 == prob.phases.size()) break;  // horizon end carries no boundary
      for (size_t b = 0; b < prev_bounds.size(); ++b) {
        if (std::abs(prev_bounds[b] - t_abs) < 0.5 * prob.phases[i].dt &&
            b < prev.al_multipliers.size() && prev.al_multipliers[b].size() == nc) {
          shifted.al_multipliers[i] = prev.al_multipliers[b];
          shifted.al_penalty[i] = prev.al_penalty[b];
          if (b < prev.al_prev_residual.size())
            shifted.al_prev_residual[i] = prev.al_prev_residual[b];
        }
      }
    }
    return shifted;
  }

  /// Merit of a dynamics-consistent trajectory under the problem's costs,
  /// barrier penalties and current AL duals; also refreshes the residual
  /// summary. Exposed for tests.
  void evaluate(const ProblemSet& prob, Solution& sol) const {
    const RelaxedBarrier reb{cfg_.reb_delta, cfg_.reb_weight};
    double cost = 0, merit = 0;
    double max_eq = 0, max_viol = 0;
    for (size_t i = 0; i < prob.phases.size(); ++i) {
      const auto& ph = prob.phases[i];
      const auto& dat = sol.phases[i];
      for (int k = 0; k < ph.node_count; ++k) {
        const double l = ph.running_cost(k, dat.x[size_t(k)], dat.u[size_t(k)]);
        cost += ph.dt * l;
        merit += ph.dt * l;
        if (ph.inequality) {
          const VectorXd g = ph.inequality(k, dat.x[size_t(k)], dat.u[size_t(k)]);
          for (int r = 0; r < g.size(); ++r) {
            merit += ph.dt * reb.value(g(r));
            max_viol = std::max(max_viol, -g(r));
          }
        }
      }
      if (ph.terminal_cost) {
        const double phi = ph.terminal_cost(dat.x.back());
        cost += phi;
        merit += phi;
      }
      if (ph.boundary_eq) {
        const VectorXd h = ph.boundary_eq(dat.x.back());
        const VectorXd& mu = sol.al_multipliers[i];
        const double sigma = sol.al_penalty[i];
        for (int c = 0; c < h.size(); ++c) {
          merit += mu(c) * h(c) + 0.5 * sigma * h(c) * h(c);
          max_eq = std::max(max_eq, std::abs(h(c)));
        }
      }
    }
    sol.cost = cost;
    sol.merit = merit;
    sol.max_eq_residual = max_eq;
    sol.max_ineq_violation = max_viol;
  }

  struct Backward {
    std::vector<std::vector<VectorXd>> kff;  // [phase][node]
    std::vector<std::vector<MatrixXd>> K;
    double dv1 = 0, dv2 = 0;
  };

 private:
  static void store_gains(const Backward& bw, Solution& sol) {
    for (size_t i = 0; i < sol.phases.size(); ++i) {
      sol.phases[i].kff = bw.kff[i];
      sol.phases[i].K = bw.K[i];
    }
  }

 public:
  bool rollout_open_loop(const ProblemSet& prob, const VectorXd& x0,
                         const std::vector<std::vector<VectorXd>>& u, Solution& sol) const try {
    VectorXd x = x0;
    for (size_t i = 0; i < prob.phases.size(); ++i) {
      const auto& ph = prob.phases[i];
      auto& dat = sol.phases[i];
      dat.x.assign(size_t(ph.node_count) + 1, VectorXd());
      dat.u = u[i];
      dat.x[0] = x;
      for (int k = 0; k < ph.node_count; ++k) {
        x = discretize_step(ph, k, x, dat.u[size_t(k)]);
        if (!x.allFinite()) return false;
        dat.x[size_t(k) + 1] = x;
      }
      if (i + 1 < prob.phases.size() && ph.reset) x = ph.reset(x, nullptr);
    }
    return true;
  } catch (const std::exception&) {
    return false;  // model threw mid-rollout; treat as divergence
  }

  /// Closed-loop rollout u = u_bar + alpha * kff + K (x - x_bar) through all
  /// phases, applying reset maps at boundaries. Returns false on divergence.
  bool forward_pass(const ProblemSet& prob, const Solution& nominal, const Backward& bw,
                    double alpha, Solution& out) const try {
    VectorXd x = nominal.phases[0].x[0];
    for (size_t i = 0; i < prob.phases.size(); ++i) {
      const auto& ph = prob.phases[i];
      const auto& nom = nominal.phases[i];
      auto& dat = out.phases[i];
      dat.x.assign(size_t(ph.node_count) + 1, VectorXd());
      dat.u.assign(size_t(ph.node_count), VectorXd());
      dat.x[0] = x;
      for (int k = 0; k < ph.node_count; ++k) {
        const VectorXd du = alpha * bw.kff[i][size_t(k)] + bw.K[i][size_t(k)] * (x - nom.x[size_t(k)]);
        dat.u[size_t(k)] = nom.u[size_t(k)] + du;
        x = discretize_step(ph, k, x, dat.u[size_t(k)]);
        if (!x.allFinite()) return false;
        dat.x[size_t(k) + 1] = x;
      }
      if (i + 1 < prob.phases.size() && ph.reset) {
        x = ph.reset(x, nullptr);
        if (!x.allFinite()) return false;
      }
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }

  /// Value recursion across all phases; the value function is pulled back
  /// through the reset-map Jacobian at phase boundaries and picks up the
  /// augmented-Lagrangian terms of the touchdown equality constraints.
  /// Returns false when a Quu factorization fails at this regularization
  /// (the caller escalates the regularization and retries).
  bool backward_pass(const ProblemSet& prob, const Solution& sol, double reg, Backward& bw) const {
    const int nx = prob.state_dim, nu = prob.control_dim;
    const RelaxedBarrier reb{cfg_.reb_delta, cfg_.reb_weight};
    const size_t np = prob.phases.size();
    bw.kff.assign(np, {});
    bw.K.assign(np, {});
    bw.dv1 = 0;
    bw.dv2 = 0;

    VectorXd vx = VectorXd::Zero(nx);
    MatrixXd vxx = MatrixXd::Zero(nx, nx);

    MatrixXd A(nx, nx), B(nx, nu), gx, gu;
    VectorXd lx(nx), lu(nu);
    MatrixXd lxx(nx, nx), luu(nu, nu), lux(nu, nx);

    for (int i = int(np) - 1; i >= 0; --i) {
      const auto& ph = prob.phases[size_t(i)];
      const auto& dat = sol.phases[size_t(i)];
      bw.kff[size_t(i)].assign(size_t(ph.node_count), VectorXd());
      bw.K[size_t(i)].assign(size_t(ph.node_count), MatrixXd());

      // pull the next phase's value function back through the reset map
      if (size_t(i) + 1 < np && ph.reset) {
        MatrixXd px;
        ph.reset(dat.x.back(), &px);
        vx = px.transpose() * vx;
        vxx = px.transpose() * vxx * px;
      }

      // this phase's terminal cost and AL terms at its end state
      if (ph.terminal_cost_expansion) {
        VectorXd tx;
        MatrixXd txx;
        ph.terminal_cost_expansion(dat.x.back(), tx, txx);
        vx += tx;
        vxx += txx;
      }
      if (ph.boundary_eq) {
        const VectorXd h = ph.boundary_eq(dat.x.back());
        const MatrixXd hx = ph.boundary_eq_jacobian(dat.x.back());
        const VectorXd& mu = sol.al_multipliers[size_t(i)];
        const double sigma = sol.al_penalty[size_t(i)];
        for (int c = 0; c < h.size(); ++c) {
          vx += (mu(c) + sigma * h(c)) * hx.row(c).transpose();
          vxx += sigma * hx.row(c).transpose() * hx.row(c);
        }
      }

      for (int k = ph.node_count - 1; k >= 0; --k) {
        const VectorXd& x = dat.x[size_t(k)];
        const VectorXd& u = dat.u[size_t(k)];
        discretize_jacobians(ph, k, x, u, A, B);
        ph.running_cost_expansion(k, x, u, lx, lu, lxx, luu, lux);
        lx *= ph.dt;
        lu *= ph.dt;
        lxx *= ph.dt;
        luu *= ph.dt;
        lux *= ph.dt;
        if (ph.inequality) {
          const VectorXd g = ph.inequality(k, x, u);
          ph.inequality_jacobians(k, x, u, gx, gu);
          for (int r = 0; r < g.size(); ++r) {
            const double b1 = reb.d1(g(r)) * ph.dt, b2 = reb.d2(g(r)) * ph.dt;
            lx += b1 * gx.row(r).transpose();
            lu += b1 * gu.row(r).transpose();
            lxx += b2 * gx.row(r).transpose() * gx.row(r);
            luu += b2 * gu.row(r).transpose() * gu.row(r);
            lux += b2 * gu.row(r).transpose() * gx.row(r);
          }
        }

        const VectorXd qx = lx + A.transpose() * vx;
        const VectorXd qu = lu + B.transpose() * vx;
        const MatrixXd qxx = lxx + A.transpose() * vxx * A;
        const MatrixXd quu = luu + B.transpose() * vxx * B;
        const MatrixXd qux = lux + B.transpose() * vxx * A;

        // state-space Tikhonov regularization on Vxx
        const MatrixXd vxx_reg = vxx + reg * MatrixXd::Identity(nx, nx);
        MatrixXd quu_reg = luu + B.transpose() * vxx_reg * B;
        const MatrixXd qux_reg = lux + B.transpose() * vxx_reg * A;
        quu_reg = 0.5 * (quu_reg + quu_reg.transpose());

        Eigen::LLT<MatrixXd> llt(quu_reg);
        if (llt.info() != Eigen::Success) return false;

        const VectorXd kff = -llt.solve(qu);
        const MatrixXd K = -llt.solve(qux_reg);
        bw.kff[size_t(i)][size_t(k)] = kff;
        bw.K[size_t(i)][size_t(k)] = K;

        bw.dv1 += kff.dot(qu);
        bw.dv2 += 0.5 * kff.dot(quu_reg * kff);

        vx = qx + K.transpose() * quu * kff + K.transpose() * qu + qux.transpose() * kff;
        vxx = qxx + K.transpose() * quu * K + K.transpose() * qux + qux.transpose() * K;
        vxx = 0.5 * (vxx + vxx.transpose()).eval();
      }
    }
    return true;
  }

 private:
  SolverConfig cfg_;
};

}  // namespace hkd::ddp

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

#include <memory>
#include <vector>

#include "hkd/cost/cost.hpp"
#include "hkd/model/dynamics.hpp"
#include "hkd/model/kinematics.hpp"
#include "hkd/reference/trajectory.hpp"
#include "hkd/solver/hsddp.hpp"
#include "hkd/solver/problem.hpp"

namespace hkd {

/// Assembles the multi-phase HKD problem for one planning window: phases
/// from the contact schedule sampled on the MPC grid, tracking references
/// per node, friction-cone and swing-clearance inequalities, touchdown
/// equality constraints at swing-to-stance boundaries, and the reset maps.
/// The object owns the per-node reference storage captured by the problem
/// callbacks, so it must outlive the solve.
class HkdMpcProblem {
 public:
  HkdMpcProblem(const RobotParams& params, const CostWeights& weights,
                const ddp::SolverConfig& scfg, const ReferenceTrajectory& ref, double t0)
      : params_(params), weights_(weights), t0_(t0), dt_(scfg.dt) {
    const int nodes = scfg.nodes();
    if (t0 + scfg.horizon > ref.end_time() + 1e-9)
      throw std::out_of_range("planning window extends past the reference trajectory");

    // contact mode per control interval, sampled zero-order-hold
    std::vector<ContactMode> modes(static_cast<size_t>(nodes));
    for (int k = 0; k < nodes; ++k) modes[size_t(k)] = ref.mode_at(t0 + k * dt_);

    // group into phases (maximal runs of constant mode)
    std::vector<std::pair<ContactMode, int>> runs;
    for (int k = 0; k < nodes; ++k) {
      if (runs.empty() || !(runs.back().first == modes[size_t(k)]))
        runs.push_back({modes[size_t(k)], 1});
      else
        runs.back().second++;
    }

    prob_.state_dim = kStateDim;
    prob_.control_dim = kControlDim;
    refs_.resize(runs.size());
    terminal_ref_ = std::make_unique<ReferencePoint>();

    int global_k = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
      const ContactMode mode = runs[i].first;
      const int count = runs[i].second;
      refs_[i] = std::make_unique<std::vector<ReferencePoint>>(size_t(count));
      for (int k = 0; k < count; ++k)
        (*refs_[i])[size_t(k)] = make_reference_point(ref, t0 + (global_k + k) * dt_, mode);

      ddp::Phase ph;
      ph.node_count = count;
      ph.dt = dt_;
      ph.mode = mode;

      const RobotParams* rp = &params_;
      const CostWeights* cw = &weights_;
      const std::vector<ReferencePoint>* pref = refs_[i].get();

      ph.dynamics = [rp, mode](int, const VectorXd& x, const VectorXd& u) {
        return hkd_dynamics(x, u, mode, *rp);
      };
      ph.dynamics_jacobians = [rp, mode](int, const VectorXd& x, const VectorXd& u, MatrixXd& A,
                                         MatrixXd& B) {
        hkd_dynamics_jacobians(x, u, mode, *rp, A, B);
      };
      ph.running_cost = [cw, pref, mode](int k, const VectorXd& x, const VectorXd& u) {
        return running_cost(x, u, mode, (*pref)[size_t(k)], *cw);
      };
      ph.running_cost_expansion = [cw, pref, mode](int k, const VectorXd& x, const VectorXd& u,
                                                   VectorXd& lx, VectorXd& lu, MatrixXd& lxx,
                                                   MatrixXd& luu, MatrixXd& lux) {
        running_cost_derivatives(x, u, mode, (*pref)[size_t(k)], *cw, lx, lu, lxx, luu, lux);
      };

      // path inequalities: friction cone rows for stance legs (scaled by the
      // robot weight so barrier slacks are O(1)), clearance for swing legs
      std::vector<int> stance_legs, swing_legs;
      for (int j = 0; j < kNumLegs; ++j) (mode.stance[j] ? stance_legs : swing_legs).push_back(j);
      const double mu = params_.friction_mu;
      const double fscale = 1.0 / (params_.mass * kGravity);
      ph.inequality = [rp, stance_legs, swing_legs, mu, fscale](int, const VectorXd& x,
                                                                const VectorXd& u) {
        VectorXd g(5 * stance_legs.size() + swing_legs.size());
        int r = 0;
        for (int j : stance_legs) {
          const Vector3d f = fscale * u.segment<3>(leg_control_offset(j));
          g(r++) = f.z();
          g(r++) = mu * f.z() - f.x();
          g(r++) = mu * f.z() + f.x();
          g(r++) = mu * f.z() - f.y();
          g(r++) = mu * f.z() + f.y();
        }
        for (int j : swing_legs) g(r++) = swing_foot_height(x, j, *rp);
        return g;
      };
      ph.inequality_jacobians = [rp, stance_legs, swing_legs, mu, fscale](int, const VectorXd& x,
                                                                          const VectorXd&,
                                                                          MatrixXd& gx,
                                                                          MatrixXd& gu) {
        const int rows = int(5 * stance_legs.size() + swing_legs.size());
        gx.setZero(rows, kStateDim);
        gu.setZero(rows, kControlDim);
        int r = 0;
        for (int j : stance_legs) {
          const int o = leg_control_offset(j);
          gu(r++, o + 2) = fscale;
          gu(r, o) = -fscale;
          gu(r++, o + 2) = mu * fscale;
          gu(r, o) = fscale;
          gu(r++, o + 2) = mu * fscale;
          gu(r, o + 1) = -fscale;
          gu(r++, o + 2) = mu * fscale;
          gu(r, o + 1) = fscale;
          gu(r++, o + 2) = mu * fscale;
        }
        VectorXd grad;
        for (int j : swing_legs) {
          swing_foot_height(x, j, *rp, &grad);
          gx.row(r++) = grad.transpose();
        }
      };

      // touchdown equality constraints and reset into the next phase
      if (i + 1 < runs.size()) {
        const ContactMode next = runs[i + 1].first;
        std::vector<int> touchdown;
        for (int j = 0; j < kNumLegs; ++j)
          if (!mode.stance[j] && next.stance[j]) touchdown.push_back(j);
        if (!touchdown.empty()) {
          ph.boundary_eq = [rp, touchdown](const VectorXd& x) {
            VectorXd h(touchdown.size());
            for (size_t c = 0; c < touchdown.size(); ++c)
              h(int(c)) = swing_foot_height(x, touchdown[c], *rp);
            return h;
          };
          ph.boundary_eq_jacobian = [rp, touchdown](const VectorXd& x) {
            MatrixXd hx(touchdown.size(), kStateDim);
            VectorXd grad;
            for (size_t c = 0; c < touchdown.size(); ++c) {
              swing_foot_height(x, touchdown[c], *rp, &grad);
              hx.row(int(c)) = grad.transpose();
            }
            return hx;
          };
        }
        ph.reset = [rp, mode, next](const VectorXd& x, MatrixXd* jac) {
          return reset_map_packed(x, mode, next, *rp, jac);
        };
      } else {
        *terminal_ref_ = make_reference_point(ref, t0 + nodes * dt_, mode);
        const ReferencePoint* tref = terminal_ref_.get();
        ph.terminal_cost = [cw, tref, mode](const VectorXd& x) {
          return terminal_cost(x, mode, *tref, *cw);
        };
        ph.terminal_cost_expansion = [cw, tref, mode](const VectorXd& x, VectorXd& lx,
                                                      MatrixXd& lxx) {
          terminal_cost_derivatives(x, mode, *tref, *cw, lx, lxx);
        };
      }

      ph.initial_control = [rp, mode](int) { return default_control(mode, *rp); };
      prob_.phases.push_back(std::move(ph));
      global_k += count;
    }
  }

  const ddp::ProblemSet& problem() const { return prob_; }
  double t0() const { return t0_; }
  double dt() const { return dt_; }

  /// Time-aligns the smoothness anchor with a (shifted) previous solution.
  void set_u_prev(const ddp::Solution& warm) {
    const auto nodes = warm.flatten();
    if (nodes.empty()) return;
    double t = t0_;
    for (auto& phase_refs : refs_) {
      for (auto& rp : *phase_refs) {
        size_t idx = 0;
        for (size_t n = 0; n < nodes.size(); ++n)
          if (nodes[n].t <= t + 0.5 * dt_) idx = n;
        rp.u_prev = nodes[idx].u;
        t += dt_;
      }
    }
  }

  /// Gravity-distributing stance forces; zero swing joint velocities.
  static VectorXd default_control(const ContactMode& mode, const RobotParams& params) {
    VectorXd u = VectorXd::Zero(kControlDim);
    const int n_stance = mode.stance_count();
    if (n_stance == 0) return u;
    const double fz = params.mass * kGravity / n_stance;
    for (int j = 0; j < kNumLegs; ++j)
      if (mode.stance[j]) u(leg_control_offset(j) + 2) = fz;
    return u;
  }

  /// Packs a measured state into the mode expected by the first phase,
  /// applying reset-map semantics to legs whose tag disagrees.
  VectorXd initial_state(const HkdState& measured) const {
    const ContactMode want = prob_.phases.front().mode;
    HkdState s = measured;
    for (int j = 0; j < kNumLegs; ++j) {
      if (s.legs[j].stance == want.stance[j]) continue;
      if (want.stance[j]) {
        s.legs[j] = LegState::make_stance(world_foot_position(measured, j, params_));
      } else {
        s.legs[j] = LegState::make_swing(params_.default_swing_q);
      }
    }
    return s.pack();
  }

 private:
  ReferencePoint make_reference_point(const ReferenceTrajectory& ref, double t,
                                      const ContactMode& mode) const {
    const ReferenceSample s = ref.at(t);
    ReferencePoint rp;
    rp.euler_ref = s.euler;
    rp.com_ref = s.com_pos;
    rp.angvel_ref = s.ang_vel;
    rp.linvel_ref = s.com_vel;
    rp.joint_ref = s.joint_q;
    for (int j = 0; j < kNumLegs; ++j)
      rp.p_rel[j] = foot_placement_offset(params_, j, s.euler.z(), s.com_pos.z());
    rp.u_prev = default_control(mode, params_);
    return rp;
  }

  RobotParams params_;
  CostWeights weights_;
  double t0_;
  double dt_;
  ddp::ProblemSet prob_;
  std::vector<std::unique_ptr<std::vector<ReferencePoint>>> refs_;
  std::unique_ptr<ReferencePoint> terminal_ref_;
};

}  // namespace hkd

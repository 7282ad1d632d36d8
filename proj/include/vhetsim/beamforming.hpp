// Copyright 2026 The vhetsim Authors
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
//
// Backhaul-aware WMMSE beamforming under a fixed association. Sum-rate
// maximization is reformulated as weighted MSE minimization and solved by
// block coordinate descent: MMSE receive scalars, inverse-MSE weights, and
// per-transmitter power-constrained transmit updates. HAPS links whose RF
// rate exceeds the FSO backhaul get switched out of the objective by a
// binary weight (their rate is pinned at the backhaul value, so beam power
// spent on them is wasted).

#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vhetsim/rates.hpp"

namespace vhetsim {

// Working variables of the block-coordinate descent. Receiver scalars and
// MSE weights are defined on active links only; entries for inactive links
// stay zero and carry no meaning.
struct WmmseState {
  Eigen::MatrixXcd u;    // receive coefficient per (i, j)
  Eigen::MatrixXd rho;   // MSE weight per (i, j)
  Eigen::VectorXd tau;   // HAPS rate value min(RF, FSO) per user
  Eigen::MatrixXi lambda;  // rate-term activity weight per (i, j)
  std::vector<std::vector<int>> served;  // users served by each transmitter
  Eigen::VectorXd mu;    // power dual per transmitter
};

WmmseState make_wmmse_state(const ChannelSet& ch, const Association& a);

struct BeamformingParams {
  double eps = 1e-4;    // relative true-rate change that stops the loop
  int max_iters = 100;
  // When set, tau/lambda are computed once from the initial beams and held
  // fixed. The monotone descent guarantee applies in this regime.
  bool freeze_lambda = false;
};

struct BeamformingTrace {
  std::vector<double> weighted_bps;  // lambda-weighted sum rate per iteration
  std::vector<double> true_bps;      // true network objective per iteration
  bool converged = false;
  int iterations = 0;
};

struct BeamformingResult {
  BeamformerSet best;          // best-so-far under the true objective
  double best_sum_rate_bps = 0.0;
  BeamformerSet final;         // beams after the last iteration
  WmmseState state;
  BeamformingTrace trace;
};

// Recomputes the HAPS rate values tau_0j = min(RF rate, FSO rate) and the
// activity weights: lambda_0j = 1 iff the RF link is the bottleneck (ties
// included), lambda_ij = 1 for every ground-BS link. Entries outside the
// served sets keep tau 0 / lambda 1.
std::pair<Eigen::VectorXd, Eigen::MatrixXi> update_tau_lambda(
    const ChannelSet& ch, const Association& a, const BeamformerSet& b);

// MMSE receive scalar u_ij = h_ij^H w_ij / (sum over all active links of
// |h_bj^H w_bl|^2 + sigma^2); the own link is part of the sum.
std::complex<double> mmse_receiver(const ChannelSet& ch, const Association& a,
                                   const BeamformerSet& b, int i, int j);

// MSE of user j decoding its stream from transmitter i with receive
// scalar u:
//   |1 - conj(u) h_ij^H w_ij|^2
//     + |u|^2 * (interference from other active links)  + sigma^2 |u|^2.
double mse(const ChannelSet& ch, const Association& a, const BeamformerSet& b,
           std::complex<double> u, int i, int j);

// Optimal MSE weight rho = 1/e, with e floored at 1e-12 to guard division
// near perfect reception.
double mse_weight(double e);

// Updates all of transmitter i's active beams at once, minimizing the
// weighted MSE objective under its power budget:
//
//   w_ij = (A_i + mu_i I)^(-1) h_ij u_ij rho_ij lambda_ij,
//   A_i  = sum over all active links (b, l) of
//          lambda_bl rho_bl |u_bl|^2 h_il h_il^H,
//
// with mu_i >= 0 chosen by bisection so the power constraint holds (mu = 0
// when the unconstrained solution already fits; radiated power is strictly
// decreasing in mu). Links with lambda = 0 get exactly zero beams. Stores
// mu_i in the state and writes the beams in place.
void transmit_update(const ChannelSet& ch, WmmseState& st, BeamformerSet& b,
                     int i, double p_max);

// The lambda-weighted sum rate: RF rates of active ground-BS links plus RF
// rates of active HAPS links that carry weight 1. This is the objective the
// descent optimizes when lambda is held fixed.
double weighted_sum_rate(const ChannelSet& ch, const Association& a,
                         const BeamformerSet& b, const Eigen::MatrixXi& lambda);

// The weighted-MSE objective the block updates descend on (with lambda
// fixed): sum over active links of lambda * (rho * e - ln rho).
double wmmse_objective(const ChannelSet& ch, const Association& a,
                       const BeamformerSet& b, const WmmseState& st);

// Full descent loop from the given initial beams: tau/lambda refresh, MMSE
// receivers, MSE weights, transmit updates, true-objective evaluation;
// best-so-far beams are kept and returned. Beams of inactive links pass
// through untouched.
BeamformingResult algorithm2_beamform(const ChannelSet& ch,
                                      const Association& a,
                                      const BeamformerSet& init,
                                      const Scenario& s,
                                      const BeamformingParams& params = {});

}  // namespace vhetsim

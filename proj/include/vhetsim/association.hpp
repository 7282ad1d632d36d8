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

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vhetsim/rates.hpp"

namespace vhetsim {

// A user-assignment problem with per-transmitter power knapsacks plus a
// cardinality cap on the HAPS row (row 0): maximize total profit subject to
//
//   sum_j gamma_ij alpha_ij weight_ij <= capacity_i   for every i,
//   sum_j gamma_0j alpha_0j           <= haps_cap,
//   sum_i gamma_ij alpha_ij           <= 1            for every j.
//
// Leaving a user unassigned is always allowed (profit 0).
struct AssignmentInstance {
  Eigen::MatrixXd profit;    // bit/s
  Eigen::MatrixXd weight;    // watts, ||w_ij||^2
  Eigen::VectorXd capacity;  // watts, per transmitter
  int haps_cap = 0;
  Eigen::MatrixXi gamma;

  int n_transmitters() const { return static_cast<int>(profit.rows()); }
  int n_users() const { return static_cast<int>(profit.cols()); }
};

struct AssociationParams {
  double eps = 1e-4;   // relative sum-rate change that stops the refinement
  int max_iters = 20;
};

// Iteration log of the associate loop. sum_rate_bps[0] is the seed
// association's true sum rate; entry m the m-th refinement's. best is the
// association attaining best_sum_rate_bps.
struct AssociationTrace {
  std::vector<double> sum_rate_bps;
  std::vector<Eigen::VectorXd> t0;  // per-user HAPS rate value per iteration
  double best_sum_rate_bps = 0.0;
  Association best;
};

// Exact optimum of the assignment instance by depth-first branch and bound.
// Users are branched in order of decreasing best-profit spread; the bound
// grants every remaining user its best feasible profit ignoring the
// knapsacks; subtrees that cannot strictly beat the incumbent are pruned.
Association solve_assignment_bnb(const AssignmentInstance& inst);

// Seed association: profits are the pessimistic all-beams-interfere rates
// (for the HAPS capped by the backhaul), weights the beam powers, solved
// exactly by solve_assignment_bnb.
Association solve_ilp_seed(const ChannelSet& ch, const BeamformerSet& b,
                           const Scenario& s);

// Two-stage association under fixed beams: ILP seed, then repeated
// assignment solves with optimistic interference-free BS profits and
// true-rate HAPS profits, keeping the best association under the true
// network objective. Stops when the true sum rate settles or max_iters.
AssociationTrace algorithm1_associate(const ChannelSet& ch,
                                      const BeamformerSet& b,
                                      const Scenario& s,
                                      const AssociationParams& params = {});

// Greedy baseline: repeatedly match the globally smallest remaining
// transmitter-user distance. A ground BS serves at most as many users as it
// has antennas, the HAPS at most its user cap. Ties break toward the lowest
// transmitter index, then the lowest user index.
Association baseline_distance(const Scenario& s);

// Same procedure driven by channel gain ||h_ij||^2, largest first.
Association baseline_channel(const ChannelSet& ch, const Scenario& s);

}  // namespace vhetsim

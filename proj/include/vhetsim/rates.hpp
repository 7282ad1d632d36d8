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

#include "vhetsim/channel.hpp"

namespace vhetsim {

// Binary user association. alpha(i, j) = 1 when transmitter i serves user j.
// Feasible associations assign each user at most once, respect the HAPS user
// cap, and never exceed gamma.
struct Association {
  Eigen::MatrixXi alpha;
};

// Transmit beamformers. w[i][j] has length n_antennas of transmitter i for
// every pair with gamma(i, j) = 1 and is empty otherwise. Pairs that are
// inactive under the current association keep their vectors; only active
// links radiate.
struct BeamformerSet {
  std::vector<std::vector<Eigen::VectorXcd>> w;

  bool has(int i, int j) const { return w[i][j].size() > 0; }
};

struct RateBreakdown {
  Eigen::VectorXd per_user_rate_bps;
  double sum_rate_bps = 0.0;
  std::vector<int> served_by;  // transmitter index, -1 when unserved
  Eigen::VectorXd per_tx_power_watts;
  // Set when a Scenario is supplied to network_sum_rate and some transmitter
  // radiates more than its budget (beyond a 1e-9 relative tolerance).
  bool power_violation = false;
};

// SINR of the link from transmitter i to user j:
//
//   |h_ij^H w_ij|^2 / (sum over active links (b, u), u != j,
//                      of |h_bj^H w_bu|^2  +  sigma^2).
//
// Only links switched on by the association interfere; beams stored for
// inactive pairs do not radiate.
double sinr(const ChannelSet& ch, const Association& a, const BeamformerSet& b,
            int i, int j);

// Shannon rate beta * log2(1 + SINR) in bit/s.
double rf_rate(const ChannelSet& ch, const Association& a,
               const BeamformerSet& b, int i, int j);

// Rate of user j when served by the HAPS: min(RF rate, FSO backhaul rate).
// The satellite link caps whatever the RF access link can carry.
double haps_rate(const ChannelSet& ch, const Association& a,
                 const BeamformerSet& b, int j);

// Sum rate of the whole network under (a, b): HAPS users get haps_rate,
// ground-BS users their RF rate, unserved users zero. Also tallies
// per-transmitter radiated power; pass the scenario to flag budget
// violations.
RateBreakdown network_sum_rate(const ChannelSet& ch, const Association& a,
                               const BeamformerSet& b,
                               const Scenario* s = nullptr);

// Association-free pessimistic rate: every stored beam (b, u), u != j,
// counts as interference regardless of the association. Lower-bounds
// rf_rate; used as the seed assignment profit.
double full_interference_rate(const ChannelSet& ch, const BeamformerSet& b,
                              int i, int j);

// Association-free optimistic rate: no interference at all,
// beta * log2(1 + |h_ij^H w_ij|^2 / sigma^2). Upper-bounds rf_rate; used as
// the refinement assignment profit.
double interference_free_rate(const ChannelSet& ch, const BeamformerSet& b,
                              int i, int j);

}  // namespace vhetsim

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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vhetsim/scenario.hpp"

namespace vhetsim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// One fading realization of the whole network: a complex channel vector per
// (transmitter, user) pair, the FSO backhaul rate feeding the HAPS, and the
// receiver noise power. Immutable once drawn; safe to share across threads.
struct ChannelSet {
  // h[i][j] has length n_antennas of transmitter i.
  std::vector<std::vector<Eigen::VectorXcd>> h;
  double fso_rate_bps = 0.0;
  double noise_power_watts = 0.0;
  // Carried along so rate evaluation doesn't need the Scenario again.
  double bandwidth_hz = 0.0;

  int n_transmitters() const { return static_cast<int>(h.size()); }
  int n_users() const {
    return h.empty() ? 0 : static_cast<int>(h[0].size());
  }
};

// Capacity of the satellite-to-HAPS optical backhaul in bit/s:
//
//   P_t * eta_t * eta_r * 10^(-L_poi/10) * 10^(-L_atm/10) * (A_R/A_B)
//   -----------------------------------------------------------------
//                        E_p * eta_b
//
// The numerator is received optical power (watts = J/s), dividing by the
// photon energy gives photons/s, and dividing by the receiver sensitivity
// (photons/bit) gives bit/s.
double fso_backhaul_rate(const FsoParams& p);

// Thermal noise power sigma^2 = 10^((N0_dBm - 30)/10) * bandwidth, in watts.
double noise_power(double bandwidth_hz, double noise_psd_dbm_hz);

// Draws every RF channel vector h_ij for the scenario:
//
//   h_ij,n = (c / (4 pi d_ij f_c)) * A_ij * F_ij,n
//
// with d_ij the transmitter-user distance (antennas co-located). Ground BS
// links carry log-normal shadowing, A_ij = 10^(X/20) with X ~ N(0, sigma_a^2)
// drawn once per (i, j) and shared across antennas, and Rayleigh small-scale
// fading F_ij,n ~ CN(0, 1). HAPS links have no shadowing term and Rician
// small-scale fading
//
//   F_0j,n = sqrt(kappa/(kappa+1)) e^(i theta_j) + sqrt(1/(kappa+1)) G,
//
// G ~ CN(0, 1), with a line-of-sight phase theta_j ~ U[0, 2pi) per user.
//
// Draw order (part of the reproducibility contract): transmitters in index
// order, users in index order within each transmitter; the HAPS draws theta
// then its antennas' G, a BS draws X then its antennas' F. Pure function of
// (scenario, seed).
ChannelSet draw_channels(const Scenario& s, std::uint64_t seed);

}  // namespace vhetsim

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

#include "vhetsim/channel.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "vhetsim/random.hpp"

namespace vhetsim {

double fso_backhaul_rate(const FsoParams& p) {
  const double received_w = p.p_t_watts * p.eta_t * p.eta_r *
                            std::pow(10.0, -p.l_poi_db / 10.0) *
                            std::pow(10.0, -p.l_atm_db / 10.0) * p.area_ratio;
  return received_w / (p.e_p_joules * p.eta_b_photons_per_bit);
}

double noise_power(double bandwidth_hz, double noise_psd_dbm_hz) {
  // dBm/Hz -> W/Hz, then times bandwidth.
  return std::pow(10.0, (noise_psd_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
}

ChannelSet draw_channels(const Scenario& s, std::uint64_t seed) {
  const int n_tx = s.n_transmitters();
  const int n_users = s.n_users();

  ChannelSet ch;
  ch.h.assign(n_tx, std::vector<Eigen::VectorXcd>(n_users));
  ch.fso_rate_bps = s.fso_rate_override_bps ? *s.fso_rate_override_bps
                                            : fso_backhaul_rate(s.fso);
  ch.noise_power_watts = noise_power(s.bandwidth_hz, s.noise_psd_dbm_hz);
  ch.bandwidth_hz = s.bandwidth_hz;

  Rng rng(seed);
  const double kappa = s.rician_kappa;
  const double los_amp = std::sqrt(kappa / (kappa + 1.0));
  const double nlos_amp = std::sqrt(1.0 / (kappa + 1.0));

  for (int i = 0; i < n_tx; ++i) {
    const Transmitter& tx = s.transmitters[i];
    const bool is_haps = tx.role == TransmitterRole::kHaps;
    for (int j = 0; j < n_users; ++j) {
      const double d = (tx.position_m - s.users_m[j]).norm();
      // Free-space amplitude pathloss; |g|^2 is the conventional
      // (c / 4 pi d f_c)^2 power pathloss.
      const double g =
          kSpeedOfLight / (4.0 * std::numbers::pi * d * s.carrier_hz);

      Eigen::VectorXcd hv(tx.n_antennas);
      if (is_haps) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const std::complex<double> los =
            los_amp * std::complex<double>(std::cos(theta), std::sin(theta));
        for (int n = 0; n < tx.n_antennas; ++n) {
          hv[n] = g * (los + nlos_amp * rng.cnormal());
        }
      } else {
        // One large-scale shadowing draw per pair, in dB, applied as an
        // amplitude factor.
        const double x_db = s.shadowing_sigma_db * rng.normal();
        const double a = std::pow(10.0, x_db / 20.0);
        for (int n = 0; n < tx.n_antennas; ++n) {
          hv[n] = g * a * rng.cnormal();
        }
      }
      ch.h[i][j] = std::move(hv);
    }
  }
  return ch;
}

}  // namespace vhetsim

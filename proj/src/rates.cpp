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

#include "vhetsim/rates.hpp"

#include <cmath>
#include <complex>

namespace vhetsim {
namespace {

// |h_bj^H w_bu|^2: power that the beam aimed at user u by transmitter b
// lands on user j.
double cross_power(const ChannelSet& ch, const BeamformerSet& b, int tx, int j,
                   int u) {
  if (!b.has(tx, u)) return 0.0;
  const std::complex<double> x = ch.h[tx][j].dot(b.w[tx][u]);
  return std::norm(x);
}

}  // namespace

double sinr(const ChannelSet& ch, const Association& a, const BeamformerSet& b,
            int i, int j) {
  const double signal = cross_power(ch, b, i, j, j);
  double denom = ch.noise_power_watts;
  for (int u = 0; u < ch.n_users(); ++u) {
    if (u == j) continue;
    for (int tx = 0; tx < ch.n_transmitters(); ++tx) {
      if (a.alpha(tx, u) == 1) denom += cross_power(ch, b, tx, j, u);
    }
  }
  return signal / denom;
}

double rf_rate(const ChannelSet& ch, const Association& a,
               const BeamformerSet& b, int i, int j) {
  return ch.bandwidth_hz * std::log2(1.0 + sinr(ch, a, b, i, j));
}

double haps_rate(const ChannelSet& ch, const Association& a,
                 const BeamformerSet& b, int j) {
  return std::min(rf_rate(ch, a, b, 0, j), ch.fso_rate_bps);
}

RateBreakdown network_sum_rate(const ChannelSet& ch, const Association& a,
                               const BeamformerSet& b, const Scenario* s) {
  const int n_tx = ch.n_transmitters();
  const int n_users = ch.n_users();

  RateBreakdown out;
  out.per_user_rate_bps = Eigen::VectorXd::Zero(n_users);
  out.served_by.assign(n_users, -1);
  out.per_tx_power_watts = Eigen::VectorXd::Zero(n_tx);

  for (int j = 0; j < n_users; ++j) {
    for (int i = 0; i < n_tx; ++i) {
      if (a.alpha(i, j) != 1) continue;
      out.served_by[j] = i;
      out.per_user_rate_bps[j] =
          i == 0 ? haps_rate(ch, a, b, j) : rf_rate(ch, a, b, i, j);
      break;  // at most one server per user
    }
    out.sum_rate_bps += out.per_user_rate_bps[j];
  }

  for (int i = 0; i < n_tx; ++i) {
    double p = 0.0;
    for (int j = 0; j < n_users; ++j) {
      if (a.alpha(i, j) == 1 && b.has(i, j)) p += b.w[i][j].squaredNorm();
    }
    out.per_tx_power_watts[i] = p;
    if (s != nullptr &&
        p > s->transmitters[i].p_max_watts * (1.0 + 1e-9)) {
      out.power_violation = true;
    }
  }
  return out;
}

double full_interference_rate(const ChannelSet& ch, const BeamformerSet& b,
                              int i, int j) {
  const double signal = cross_power(ch, b, i, j, j);
  double denom = ch.noise_power_watts;
  for (int u = 0; u < ch.n_users(); ++u) {
    if (u == j) continue;
    for (int tx = 0; tx < ch.n_transmitters(); ++tx) {
      denom += cross_power(ch, b, tx, j, u);
    }
  }
  return ch.bandwidth_hz * std::log2(1.0 + signal / denom);
}

double interference_free_rate(const ChannelSet& ch, const BeamformerSet& b,
                              int i, int j) {
  const double signal = cross_power(ch, b, i, j, j);
  return ch.bandwidth_hz *
         std::log2(1.0 + signal / ch.noise_power_watts);
}

}  // namespace vhetsim

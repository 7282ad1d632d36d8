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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "vhetsim/channel.hpp"
#include "vhetsim/orchestrator.hpp"
#include "vhetsim/rates.hpp"
#include "vhetsim/scenario.hpp"

using namespace vhetsim;
using cd = std::complex<double>;

namespace {

// A fully pinned two-transmitter, two-user network. All rate values below
// were evaluated by hand from these numbers and frozen.
struct Fixture {
  ChannelSet ch;
  BeamformerSet b;
  Association a;

  Fixture() {
    ch.h.assign(2, std::vector<Eigen::VectorXcd>(2));
    ch.h[0][0] = Eigen::VectorXcd(2);
    ch.h[0][0] << cd(0.3, 0.4), cd(-0.2, 0.1);
    ch.h[0][1] = Eigen::VectorXcd(2);
    ch.h[0][1] << cd(0.05, -0.12), cd(0.22, 0.07);
    ch.h[1][0] = Eigen::VectorXcd(1);
    ch.h[1][0] << cd(-0.8, 0.15);
    ch.h[1][1] = Eigen::VectorXcd(1);
    ch.h[1][1] << cd(0.6, -0.33);
    ch.fso_rate_bps = 5.0e7;
    ch.noise_power_watts = 2.5e-3;
    ch.bandwidth_hz = 1.0e7;

    b.w.assign(2, std::vector<Eigen::VectorXcd>(2));
    b.w[0][0] = Eigen::VectorXcd(2);
    b.w[0][0] << cd(1.1, -0.2), cd(0.4, 0.9);
    b.w[0][1] = Eigen::VectorXcd(2);
    b.w[0][1] << cd(0.25, 0.0), cd(-0.5, 0.35);
    b.w[1][0] = Eigen::VectorXcd(1);
    b.w[1][0] << cd(0.7, 0.7);
    b.w[1][1] = Eigen::VectorXcd(1);
    b.w[1][1] << cd(-0.45, 0.6);

    a.alpha = Eigen::MatrixXi::Zero(2, 2);
    a.alpha(0, 0) = 1;  // HAPS serves user 0
    a.alpha(1, 1) = 1;  // BS serves user 1
  }
};

}  // namespace

TEST_CASE("sinr and rates match the pinned evaluation") {
  const Fixture f;
  CHECK(sinr(f.ch, f.a, f.b, 0, 0) ==
        doctest::Approx(1.5620158267388584).epsilon(1e-12));
  CHECK(sinr(f.ch, f.a, f.b, 1, 1) ==
        doctest::Approx(1.8750799778194844).epsilon(1e-12));
  CHECK(rf_rate(f.ch, f.a, f.b, 0, 0) ==
        doctest::Approx(1.3572793878915574e7).epsilon(1e-12));
  CHECK(rf_rate(f.ch, f.a, f.b, 1, 1) ==
        doctest::Approx(1.5236020889261222e7).epsilon(1e-12));
}

TEST_CASE("haps rate is the min of access and backhaul") {
  Fixture f;
  // RF is the bottleneck with the default backhaul.
  CHECK(haps_rate(f.ch, f.a, f.b, 0) ==
        doctest::Approx(1.3572793878915574e7).epsilon(1e-12));
  // Shrinking the backhaul below the RF rate flips the bottleneck.
  f.ch.fso_rate_bps = 1.0e6;
  CHECK(haps_rate(f.ch, f.a, f.b, 0) == doctest::Approx(1.0e6).epsilon(1e-12));
  f.ch.fso_rate_bps = 0.0;
  CHECK(haps_rate(f.ch, f.a, f.b, 0) == 0.0);
}

TEST_CASE("network sum rate adds per-user contributions") {
  const Fixture f;
  const RateBreakdown r = network_sum_rate(f.ch, f.a, f.b);
  CHECK(r.sum_rate_bps == doctest::Approx(2.8808814768176794e7).epsilon(1e-12));
  CHECK(r.per_user_rate_bps[0] ==
        doctest::Approx(1.3572793878915574e7).epsilon(1e-12));
  CHECK(r.per_user_rate_bps[1] ==
        doctest::Approx(1.5236020889261222e7).epsilon(1e-12));
  CHECK(r.served_by[0] == 0);
  CHECK(r.served_by[1] == 1);
  // Only active links radiate.
  CHECK(r.per_tx_power_watts[0] == doctest::Approx(2.22).epsilon(1e-12));
  CHECK(r.per_tx_power_watts[1] == doctest::Approx(0.5625).epsilon(1e-12));
  CHECK_FALSE(r.power_violation);
}

TEST_CASE("unserved users contribute zero") {
  Fixture f;
  f.a.alpha(1, 1) = 0;
  const RateBreakdown r = network_sum_rate(f.ch, f.a, f.b);
  CHECK(r.served_by[1] == -1);
  CHECK(r.per_user_rate_bps[1] == 0.0);
  // With the BS silent, the HAPS user loses its interference term.
  CHECK(r.per_user_rate_bps[0] > 1.3572793878915574e7);
  CHECK(r.sum_rate_bps == doctest::Approx(r.per_user_rate_bps[0]));
}

TEST_CASE("power budget violations are flagged against the scenario") {
  const Fixture f;
  Scenario s;
  Transmitter haps;
  haps.role = TransmitterRole::kHaps;
  haps.position_m = {0.0, 0.0, 18000.0};
  haps.n_antennas = 2;
  haps.p_max_watts = 100.0;
  Transmitter bs;
  bs.role = TransmitterRole::kGroundBs;
  bs.n_antennas = 1;
  bs.p_max_watts = 1.0;
  s.transmitters = {haps, bs};
  s.users_m = {{10.0, 0.0, 0.0}, {20.0, 0.0, 0.0}};
  s.haps_user_cap = 2;
  s.gamma = Eigen::MatrixXi::Ones(2, 2);

  RateBreakdown ok = network_sum_rate(f.ch, f.a, f.b, &s);
  CHECK_FALSE(ok.power_violation);

  s.transmitters[1].p_max_watts = 0.5;  // active beam radiates 0.5625
  RateBreakdown bad = network_sum_rate(f.ch, f.a, f.b, &s);
  CHECK(bad.power_violation);
}

TEST_CASE("profit bounds match the pinned evaluation") {
  const Fixture f;
  CHECK(full_interference_rate(f.ch, f.b, 0, 0) ==
        doctest::Approx(1.233459060472374e7).epsilon(1e-12));
  CHECK(full_interference_rate(f.ch, f.b, 1, 1) ==
        doctest::Approx(5.25525212151952e6).epsilon(1e-12));
  CHECK(interference_free_rate(f.ch, f.b, 0, 0) ==
        doctest::Approx(7.878970510151082e7).epsilon(1e-12));
  CHECK(interference_free_rate(f.ch, f.b, 1, 0) ==
        doctest::Approx(8.0262467726481930e7).epsilon(1e-12));
}

TEST_CASE("pessimistic and optimistic rates bracket the true rate") {
  const Scenario s = generate_medium_scenario(21, 10);
  const ChannelSet ch = draw_channels(s, 22);
  const BeamformerSet b = init_beamformers(ch, s, 0);
  Association a;
  a.alpha = Eigen::MatrixXi::Zero(s.n_transmitters(), s.n_users());
  // Arbitrary feasible association: user j on transmitter j mod n_tx,
  // skipping extra HAPS users beyond the cap.
  int haps_used = 0;
  for (int j = 0; j < s.n_users(); ++j) {
    const int i = j % s.n_transmitters();
    if (i == 0 && ++haps_used > s.haps_user_cap) continue;
    a.alpha(i, j) = 1;
  }
  for (int j = 0; j < s.n_users(); ++j) {
    for (int i = 0; i < s.n_transmitters(); ++i) {
      if (a.alpha(i, j) != 1) continue;
      const double lo = full_interference_rate(ch, b, i, j);
      const double mid = rf_rate(ch, a, b, i, j);
      const double hi = interference_free_rate(ch, b, i, j);
      CHECK(lo <= mid * (1.0 + 1e-12));
      CHECK(mid <= hi * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("sinr is invariant to a common beam phase") {
  Fixture f;
  const double base = sinr(f.ch, f.a, f.b, 0, 0);
  const cd phase = std::polar(1.0, 1.234);
  f.b.w[0][0] *= phase;
  CHECK(sinr(f.ch, f.a, f.b, 0, 0) == doctest::Approx(base).epsilon(1e-12));
}

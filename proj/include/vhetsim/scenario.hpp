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
// Network data model for an integrated satellite / HAPS / ground downlink:
// a geostationary satellite feeds one high-altitude platform station over a
// free-space optical backhaul, and the HAPS plus a set of ground base
// stations serve single-antenna users over RF. This header defines the
// immutable scenario description (geometry, power budgets, radio
// parameters) together with generators for the two reference layouts and a
// JSON reader/writer.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vhetsim {

enum class TransmitterRole { kHaps, kGroundBs };

struct Transmitter {
  TransmitterRole role = TransmitterRole::kGroundBs;
  Eigen::Vector3d position_m = Eigen::Vector3d::Zero();  // x, y, altitude
  int n_antennas = 1;
  double p_max_watts = 1.0;
};

// Satellite-to-HAPS optical link budget. The backhaul rate it induces is
// computed in channel.hpp (fso_backhaul_rate).
struct FsoParams {
  double p_t_watts = 1.0;            // optical transmit power
  double eta_t = 0.8;                // transmitter optical efficiency
  double eta_r = 0.8;                // receiver optical efficiency
  double l_poi_db = 1.0;             // pointing loss
  double l_atm_db = 2.0;             // atmospheric attenuation
  double area_ratio = 4.0e-8;        // receiver aperture over beam footprint
  double e_p_joules = 1.282e-19;     // photon energy at the optical carrier
  double eta_b_photons_per_bit = 100.0;  // receiver sensitivity
};

// Complete immutable description of one network realization's fixed part
// (everything except the fading draws). Transmitter 0 is always the HAPS.
struct Scenario {
  std::vector<Transmitter> transmitters;
  std::vector<Eigen::Vector3d> users_m;  // user positions, z = 0
  Eigen::Vector3d satellite_m = Eigen::Vector3d::Zero();

  double bandwidth_hz = 1.0e7;
  double carrier_hz = 3.0e9;
  double noise_psd_dbm_hz = -174.0;

  int haps_user_cap = 0;        // max users the HAPS payload can serve
  double rician_kappa = 5.0;    // HAPS link K-factor
  double shadowing_sigma_db = 5.0;

  FsoParams fso;
  // When set, the FSO backhaul rate is pinned to this value and the link
  // budget above is ignored. Lets sweeps control backhaul capacity exactly.
  std::optional<double> fso_rate_override_bps;

  // Data availability: gamma(i, j) = 1 when transmitter i holds user j's
  // data and may serve it. Layout generators set it to all ones.
  Eigen::MatrixXi gamma;

  int n_transmitters() const { return static_cast<int>(transmitters.size()); }
  int n_users() const { return static_cast<int>(users_m.size()); }
};

bool operator==(const Transmitter& a, const Transmitter& b);
bool operator==(const FsoParams& a, const FsoParams& b);
bool operator==(const Scenario& a, const Scenario& b);

enum class Layout { kMedium, kLarge };

// Medium layout: a 5 km square footprint whose lower-left 1 km square is a
// dense urban subarea holding 12 BSs and 60% of the users (floor rule); the
// remaining users fall uniformly in the rest of the footprint. HAPS at
// (2.5, 2.5, 18) km, satellite directly above at 36000 km altitude.
//
// The overrides map adjusts named defaults before construction. Supported
// keys: bandwidth_hz, carrier_hz, noise_psd_dbm_hz, rician_kappa,
// shadowing_sigma_db, haps_antennas, haps_power_w, haps_power_dbw,
// haps_user_cap, bs_antennas, bs_power_urban_w, bs_power_suburban_w,
// bs_power_rural_w, fso_rate_override_bps. Unknown keys are an error.
// Unless haps_user_cap is given, the HAPS user cap follows its antenna
// count. Generation is a pure function of (seed, n_users, overrides).
Scenario generate_medium_scenario(
    std::uint64_t seed, int n_users,
    const std::map<std::string, double>& overrides = {});

// Large layout: a 30 km footprint with an urban 5 km square (60 BSs, 60% of
// users), a suburban 5 km square in the opposite corner (30 BSs, 30% of
// users), and 8 rural BSs plus the remaining users elsewhere. HAPS and
// satellite sit over the footprint center. Same overrides as above.
Scenario generate_large_scenario(
    std::uint64_t seed, int n_users,
    const std::map<std::string, double>& overrides = {});

Scenario generate_scenario(Layout layout, std::uint64_t seed, int n_users,
                           const std::map<std::string, double>& overrides = {});

// Throws std::invalid_argument when any structural invariant fails:
// transmitter 0 not a HAPS, non-positive powers or bandwidth, gamma entries
// outside {0,1}, ground BS off the ground, and so on.
void validate_scenario(const Scenario& s);

// JSON round trip. parse(serialize(s)) reproduces s field for field;
// parse failures name the offending field. parse_scenario validates.
std::string serialize_scenario(const Scenario& s);
Scenario parse_scenario(const std::string& json_text);

}  // namespace vhetsim

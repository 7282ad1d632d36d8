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

#include "vhetsim/scenario.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "vhetsim/random.hpp"

namespace vhetsim {
namespace {

using nlohmann::json;

// Layout defaults, mutated by the overrides map before construction.
struct LayoutDefaults {
  double bandwidth_hz = 1.0e7;
  double carrier_hz = 3.0e9;
  double noise_psd_dbm_hz = -174.0;
  double rician_kappa = 5.0;
  double shadowing_sigma_db = 5.0;
  int haps_antennas = 20;
  double haps_power_w = 100.0;
  int haps_user_cap = -1;  // -1: follow the antenna count
  int bs_antennas = 1;
  double bs_power_urban_w = 1.0;
  double bs_power_suburban_w = 2.0;
  double bs_power_rural_w = 5.0;
  std::optional<double> fso_rate_override_bps;
};

void apply_overrides(LayoutDefaults& d,
                     const std::map<std::string, double>& overrides) {
  for (const auto& [key, value] : overrides) {
    if (key == "bandwidth_hz") {
      d.bandwidth_hz = value;
    } else if (key == "carrier_hz") {
      d.carrier_hz = value;
    } else if (key == "noise_psd_dbm_hz") {
      d.noise_psd_dbm_hz = value;
    } else if (key == "rician_kappa") {
      d.rician_kappa = value;
    } else if (key == "shadowing_sigma_db") {
      d.shadowing_sigma_db = value;
    } else if (key == "haps_antennas") {
      d.haps_antennas = static_cast<int>(value);
    } else if (key == "haps_power_w") {
      d.haps_power_w = value;
    } else if (key == "haps_power_dbw") {
      d.haps_power_w = std::pow(10.0, value / 10.0);
    } else if (key == "haps_user_cap") {
      d.haps_user_cap = static_cast<int>(value);
    } else if (key == "bs_antennas") {
      d.bs_antennas = static_cast<int>(value);
    } else if (key == "bs_power_urban_w") {
      d.bs_power_urban_w = value;
    } else if (key == "bs_power_suburban_w") {
      d.bs_power_suburban_w = value;
    } else if (key == "bs_power_rural_w") {
      d.bs_power_rural_w = value;
    } else if (key == "fso_rate_override_bps") {
      d.fso_rate_override_bps = value;
    } else {
      throw std::invalid_argument("unknown override key: " + key);
    }
  }
}

Transmitter make_bs(Rng& rng, double lo_x, double lo_y, double hi_x,
                    double hi_y, int antennas, double power_w) {
  Transmitter t;
  t.role = TransmitterRole::kGroundBs;
  t.position_m = {rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y), 0.0};
  t.n_antennas = antennas;
  t.p_max_watts = power_w;
  return t;
}

void finish_common(Scenario& s, const LayoutDefaults& d) {
  s.bandwidth_hz = d.bandwidth_hz;
  s.carrier_hz = d.carrier_hz;
  s.noise_psd_dbm_hz = d.noise_psd_dbm_hz;
  s.rician_kappa = d.rician_kappa;
  s.shadowing_sigma_db = d.shadowing_sigma_db;
  s.haps_user_cap = d.haps_user_cap >= 0 ? d.haps_user_cap : d.haps_antennas;
  s.fso_rate_override_bps = d.fso_rate_override_bps;
  s.gamma = Eigen::MatrixXi::Ones(s.n_transmitters(), s.n_users());
}

}  // namespace

bool operator==(const Transmitter& a, const Transmitter& b) {
  return a.role == b.role && a.position_m == b.position_m &&
         a.n_antennas == b.n_antennas && a.p_max_watts == b.p_max_watts;
}

bool operator==(const FsoParams& a, const FsoParams& b) {
  return a.p_t_watts == b.p_t_watts && a.eta_t == b.eta_t &&
         a.eta_r == b.eta_r && a.l_poi_db == b.l_poi_db &&
         a.l_atm_db == b.l_atm_db && a.area_ratio == b.area_ratio &&
         a.e_p_joules == b.e_p_joules &&
         a.eta_b_photons_per_bit == b.eta_b_photons_per_bit;
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.transmitters == b.transmitters && a.users_m == b.users_m &&
         a.satellite_m == b.satellite_m && a.bandwidth_hz == b.bandwidth_hz &&
         a.carrier_hz == b.carrier_hz &&
         a.noise_psd_dbm_hz == b.noise_psd_dbm_hz &&
         a.haps_user_cap == b.haps_user_cap &&
         a.rician_kappa == b.rician_kappa &&
         a.shadowing_sigma_db == b.shadowing_sigma_db && a.fso == b.fso &&
         a.fso_rate_override_bps == b.fso_rate_override_bps &&
         a.gamma.rows() == b.gamma.rows() && a.gamma.cols() == b.gamma.cols() &&
         a.gamma == b.gamma;
}

Scenario generate_medium_scenario(
    std::uint64_t seed, int n_users,
    const std::map<std::string, double>& overrides) {
  if (n_users < 1) {
    throw std::invalid_argument("generate_medium_scenario: n_users must be >= 1");
  }
  LayoutDefaults d;
  apply_overrides(d, overrides);

  constexpr double kFootprint = 5000.0;  // meters
  constexpr double kSub1 = 1000.0;
  constexpr int kNumBs = 12;

  Scenario s;
  Rng rng(seed);

  Transmitter haps;
  haps.role = TransmitterRole::kHaps;
  haps.position_m = {2500.0, 2500.0, 18000.0};
  haps.n_antennas = d.haps_antennas;
  haps.p_max_watts = d.haps_power_w;
  s.transmitters.push_back(haps);

  // All medium-layout BSs live in the urban subarea.
  for (int k = 0; k < kNumBs; ++k) {
    s.transmitters.push_back(
        make_bs(rng, 0.0, 0.0, kSub1, kSub1, d.bs_antennas, d.bs_power_urban_w));
  }

  // 60% of users (integer floor) in the urban subarea, remainder uniform in
  // the rest of the footprint via rejection.
  const int n1 = (6 * n_users) / 10;
  for (int u = 0; u < n1; ++u) {
    s.users_m.push_back({rng.uniform(0.0, kSub1), rng.uniform(0.0, kSub1), 0.0});
  }
  for (int u = n1; u < n_users; ++u) {
    double x, y;
    do {
      x = rng.uniform(0.0, kFootprint);
      y = rng.uniform(0.0, kFootprint);
    } while (x < kSub1 && y < kSub1);
    s.users_m.push_back({x, y, 0.0});
  }

  s.satellite_m = {2500.0, 2500.0, 3.6e7};
  finish_common(s, d);
  return s;
}

Scenario generate_large_scenario(
    std::uint64_t seed, int n_users,
    const std::map<std::string, double>& overrides) {
  if (n_users < 1) {
    throw std::invalid_argument("generate_large_scenario: n_users must be >= 1");
  }
  LayoutDefaults d;
  d.haps_antennas = 40;
  d.haps_power_w = 200.0;
  apply_overrides(d, overrides);

  constexpr double kFootprint = 30000.0;
  constexpr double kUrbanHi = 5000.0;             // [0, 5] km square
  constexpr double kSuburbanLo = 25000.0;         // [25, 30] km square

  Scenario s;
  Rng rng(seed);

  Transmitter haps;
  haps.role = TransmitterRole::kHaps;
  haps.position_m = {15000.0, 15000.0, 18000.0};
  haps.n_antennas = d.haps_antennas;
  haps.p_max_watts = d.haps_power_w;
  s.transmitters.push_back(haps);

  auto in_urban = [&](double x, double y) { return x < kUrbanHi && y < kUrbanHi; };
  auto in_suburban = [&](double x, double y) {
    return x >= kSuburbanLo && y >= kSuburbanLo;
  };

  for (int k = 0; k < 60; ++k) {
    s.transmitters.push_back(make_bs(rng, 0.0, 0.0, kUrbanHi, kUrbanHi,
                                     d.bs_antennas, d.bs_power_urban_w));
  }
  for (int k = 0; k < 30; ++k) {
    s.transmitters.push_back(make_bs(rng, kSuburbanLo, kSuburbanLo, kFootprint,
                                     kFootprint, d.bs_antennas,
                                     d.bs_power_suburban_w));
  }
  for (int k = 0; k < 8; ++k) {
    double x, y;
    do {
      x = rng.uniform(0.0, kFootprint);
      y = rng.uniform(0.0, kFootprint);
    } while (in_urban(x, y) || in_suburban(x, y));
    Transmitter t;
    t.role = TransmitterRole::kGroundBs;
    t.position_m = {x, y, 0.0};
    t.n_antennas = d.bs_antennas;
    t.p_max_watts = d.bs_power_rural_w;
    s.transmitters.push_back(t);
  }

  // 60% urban, 30% suburban (both floored), remainder rural.
  const int n1 = (6 * n_users) / 10;
  const int n2 = (3 * n_users) / 10;
  for (int u = 0; u < n1; ++u) {
    s.users_m.push_back(
        {rng.uniform(0.0, kUrbanHi), rng.uniform(0.0, kUrbanHi), 0.0});
  }
  for (int u = 0; u < n2; ++u) {
    s.users_m.push_back({rng.uniform(kSuburbanLo, kFootprint),
                         rng.uniform(kSuburbanLo, kFootprint), 0.0});
  }
  for (int u = n1 + n2; u < n_users; ++u) {
    double x, y;
    do {
      x = rng.uniform(0.0, kFootprint);
      y = rng.uniform(0.0, kFootprint);
    } while (in_urban(x, y) || in_suburban(x, y));
    s.users_m.push_back({x, y, 0.0});
  }

  s.satellite_m = {15000.0, 15000.0, 3.6e7};
  finish_common(s, d);
  return s;
}

Scenario generate_scenario(Layout layout, std::uint64_t seed, int n_users,
                           const std::map<std::string, double>& overrides) {
  return layout == Layout::kMedium
             ? generate_medium_scenario(seed, n_users, overrides)
             : generate_large_scenario(seed, n_users, overrides);
}

void validate_scenario(const Scenario& s) {
  if (s.transmitters.empty()) {
    throw std::invalid_argument("scenario: no transmitters");
  }
  if (s.transmitters[0].role != TransmitterRole::kHaps) {
    throw std::invalid_argument("scenario: transmitter 0 must be the HAPS");
  }
  for (int i = 0; i < s.n_transmitters(); ++i) {
    const Transmitter& t = s.transmitters[i];
    if (i > 0 && t.role == TransmitterRole::kHaps) {
      throw std::invalid_argument("scenario: more than one HAPS");
    }
    if (t.role == TransmitterRole::kHaps && t.position_m.z() <= 0.0) {
      throw std::invalid_argument("scenario: HAPS altitude must be positive");
    }
    if (t.role == TransmitterRole::kGroundBs && t.position_m.z() != 0.0) {
      throw std::invalid_argument("scenario: ground BS must be at z = 0");
    }
    if (t.n_antennas < 1) {
      throw std::invalid_argument("scenario: n_antennas must be >= 1");
    }
    if (!(t.p_max_watts > 0.0)) {
      throw std::invalid_argument("scenario: p_max_watts must be positive");
    }
  }
  for (const auto& u : s.users_m) {
    if (u.z() != 0.0) {
      throw std::invalid_argument("scenario: users must be at z = 0");
    }
  }
  if (!(s.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("scenario: bandwidth_hz must be positive");
  }
  if (!(s.carrier_hz > 0.0)) {
    throw std::invalid_argument("scenario: carrier_hz must be positive");
  }
  if (s.haps_user_cap < 0) {
    throw std::invalid_argument("scenario: haps_user_cap must be >= 0");
  }
  if (s.rician_kappa < 0.0) {
    throw std::invalid_argument("scenario: rician_kappa must be >= 0");
  }
  if (s.shadowing_sigma_db < 0.0) {
    throw std::invalid_argument("scenario: shadowing_sigma_db must be >= 0");
  }
  if (s.gamma.rows() != s.n_transmitters() || s.gamma.cols() != s.n_users()) {
    throw std::invalid_argument("scenario: gamma must be n_transmitters x n_users");
  }
  for (int i = 0; i < s.gamma.rows(); ++i) {
    for (int j = 0; j < s.gamma.cols(); ++j) {
      if (s.gamma(i, j) != 0 && s.gamma(i, j) != 1) {
        throw std::invalid_argument("scenario: gamma entries must be 0 or 1");
      }
    }
  }
  const FsoParams& f = s.fso;
  if (!(f.p_t_watts > 0.0) || !(f.e_p_joules > 0.0) ||
      !(f.eta_b_photons_per_bit > 0.0)) {
    throw std::invalid_argument("scenario: fso powers/energies must be positive");
  }
  if (!(f.eta_t > 0.0 && f.eta_t <= 1.0) || !(f.eta_r > 0.0 && f.eta_r <= 1.0)) {
    throw std::invalid_argument("scenario: fso efficiencies must be in (0, 1]");
  }
  if (f.l_poi_db < 0.0 || f.l_atm_db < 0.0) {
    throw std::invalid_argument("scenario: fso losses must be >= 0");
  }
  if (!(f.area_ratio > 0.0 && f.area_ratio <= 1.0)) {
    throw std::invalid_argument("scenario: fso area_ratio must be in (0, 1]");
  }
  if (s.fso_rate_override_bps && *s.fso_rate_override_bps < 0.0) {
    throw std::invalid_argument("scenario: fso rate_override_bps must be >= 0");
  }
}

namespace {

json position_to_json(const Eigen::Vector3d& p) {
  return json::array({p.x(), p.y(), p.z()});
}

Eigen::Vector3d position_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() ||
      !j[1].is_number() || !j[2].is_number()) {
    throw std::invalid_argument("scenario: " + field +
                                " must be a 3-element number array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const json& require(const json& j, const std::string& field) {
  auto it = j.find(field);
  if (it == j.end()) {
    throw std::invalid_argument("scenario: missing field \"" + field + "\"");
  }
  return *it;
}

double require_number(const json& j, const std::string& field) {
  const json& v = require(j, field);
  if (!v.is_number()) {
    throw std::invalid_argument("scenario: field \"" + field +
                                "\" must be a number");
  }
  return v.get<double>();
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["transmitters"] = json::array();
  for (const Transmitter& t : s.transmitters) {
    j["transmitters"].push_back(
        {{"role", t.role == TransmitterRole::kHaps ? "HAPS" : "GroundBS"},
         {"position", position_to_json(t.position_m)},
         {"n_antennas", t.n_antennas},
         {"p_max_watts", t.p_max_watts}});
  }
  j["users"] = json::array();
  for (const auto& u : s.users_m) j["users"].push_back(position_to_json(u));
  j["satellite"] = position_to_json(s.satellite_m);
  j["radio"] = {{"bandwidth_hz", s.bandwidth_hz},
                {"carrier_hz", s.carrier_hz},
                {"noise_psd_dbm_hz", s.noise_psd_dbm_hz}};
  j["haps"] = {{"user_cap", s.haps_user_cap},
               {"rician_kappa", s.rician_kappa}};
  j["shadowing_sigma_db"] = s.shadowing_sigma_db;
  json fso = {{"p_t_watts", s.fso.p_t_watts},
              {"eta_t", s.fso.eta_t},
              {"eta_r", s.fso.eta_r},
              {"l_poi_db", s.fso.l_poi_db},
              {"l_atm_db", s.fso.l_atm_db},
              {"area_ratio", s.fso.area_ratio},
              {"e_p_joules", s.fso.e_p_joules},
              {"eta_b_photons_per_bit", s.fso.eta_b_photons_per_bit}};
  if (s.fso_rate_override_bps) {
    fso["rate_override_bps"] = *s.fso_rate_override_bps;
  }
  j["fso"] = std::move(fso);
  // gamma defaults to all ones on parse; only emitted when it carries
  // information.
  if (!s.gamma.isOnes()) {
    json rows = json::array();
    for (int i = 0; i < s.gamma.rows(); ++i) {
      json row = json::array();
      for (int jj = 0; jj < s.gamma.cols(); ++jj) row.push_back(s.gamma(i, jj));
      rows.push_back(std::move(row));
    }
    j["gamma"] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: not valid JSON: ") +
                                e.what());
  }

  Scenario s;
  const json& txs = require(j, "transmitters");
  if (!txs.is_array() || txs.empty()) {
    throw std::invalid_argument(
        "scenario: field \"transmitters\" must be a non-empty array");
  }
  for (const json& tj : txs) {
    Transmitter t;
    const json& role = require(tj, "role");
    if (role == "HAPS") {
      t.role = TransmitterRole::kHaps;
    } else if (role == "GroundBS") {
      t.role = TransmitterRole::kGroundBs;
    } else {
      throw std::invalid_argument(
          "scenario: field \"role\" must be \"HAPS\" or \"GroundBS\"");
    }
    t.position_m = position_from_json(require(tj, "position"), "position");
    t.n_antennas = static_cast<int>(require_number(tj, "n_antennas"));
    t.p_max_watts = require_number(tj, "p_max_watts");
    s.transmitters.push_back(t);
  }

  const json& users = require(j, "users");
  if (!users.is_array()) {
    throw std::invalid_argument("scenario: field \"users\" must be an array");
  }
  for (const json& uj : users) {
    s.users_m.push_back(position_from_json(uj, "users"));
  }

  s.satellite_m = position_from_json(require(j, "satellite"), "satellite");

  const json& radio = require(j, "radio");
  s.bandwidth_hz = require_number(radio, "bandwidth_hz");
  s.carrier_hz = require_number(radio, "carrier_hz");
  s.noise_psd_dbm_hz = require_number(radio, "noise_psd_dbm_hz");

  const json& haps = require(j, "haps");
  s.haps_user_cap = static_cast<int>(require_number(haps, "user_cap"));
  s.rician_kappa = require_number(haps, "rician_kappa");

  s.shadowing_sigma_db = require_number(j, "shadowing_sigma_db");

  const json& fso = require(j, "fso");
  if (fso.contains("rate_override_bps")) {
    s.fso_rate_override_bps = require_number(fso, "rate_override_bps");
  }
  // Full link-budget parameters are optional when an override pins the
  // rate; if any budget key appears, all of them must.
  const bool has_budget = fso.contains("p_t_watts") || fso.contains("eta_t") ||
                          fso.contains("eta_r") || fso.contains("l_poi_db") ||
                          fso.contains("l_atm_db") ||
                          fso.contains("area_ratio") ||
                          fso.contains("e_p_joules") ||
                          fso.contains("eta_b_photons_per_bit");
  if (has_budget) {
    s.fso.p_t_watts = require_number(fso, "p_t_watts");
    s.fso.eta_t = require_number(fso, "eta_t");
    s.fso.eta_r = require_number(fso, "eta_r");
    s.fso.l_poi_db = require_number(fso, "l_poi_db");
    s.fso.l_atm_db = require_number(fso, "l_atm_db");
    s.fso.area_ratio = require_number(fso, "area_ratio");
    s.fso.e_p_joules = require_number(fso, "e_p_joules");
    s.fso.eta_b_photons_per_bit = require_number(fso, "eta_b_photons_per_bit");
  } else if (!s.fso_rate_override_bps) {
    throw std::invalid_argument(
        "scenario: field \"fso\" needs link-budget parameters or "
        "\"rate_override_bps\"");
  }

  if (j.contains("gamma")) {
    const json& g = require(j, "gamma");
    if (!g.is_array() || g.size() != s.transmitters.size()) {
      throw std::invalid_argument(
          "scenario: field \"gamma\" must have one row per transmitter");
    }
    s.gamma.resize(static_cast<int>(s.transmitters.size()),
                   static_cast<int>(s.users_m.size()));
    for (int i = 0; i < s.gamma.rows(); ++i) {
      const json& row = g[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != s.users_m.size()) {
        throw std::invalid_argument(
            "scenario: field \"gamma\" must have one column per user");
      }
      for (int jj = 0; jj < s.gamma.cols(); ++jj) {
        const json& cell = row[static_cast<std::size_t>(jj)];
        if (!cell.is_number_integer()) {
          throw std::invalid_argument(
              "scenario: field \"gamma\" entries must be integers");
        }
        s.gamma(i, jj) = cell.get<int>();
      }
    }
  } else {
    s.gamma = Eigen::MatrixXi::Ones(static_cast<int>(s.transmitters.size()),
                                    static_cast<int>(s.users_m.size()));
  }

  validate_scenario(s);
  return s;
}

}  // namespace vhetsim

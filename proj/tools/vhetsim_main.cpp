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
// Command-line front end: scenario generation, single solves, and
// Monte-Carlo parameter sweeps. Machine-readable results go to files and
// stdout; diagnostics to stderr. All randomness flows through --seed.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vhetsim/channel.hpp"
#include "vhetsim/orchestrator.hpp"
#include "vhetsim/scenario.hpp"

namespace {

using namespace vhetsim;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::map<std::string, double> parse_overrides(
    const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("override must be key=value: " + kv);
    }
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

std::string format_rate_mbps(double bps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", bps / 1e6);
  return buf;
}

std::string format_fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

int cmd_generate(const std::string& layout_name, int users,
                 std::uint64_t seed, const std::vector<std::string>& kvs,
                 const std::string& out_path) {
  const Layout layout =
      layout_name == "medium" ? Layout::kMedium : Layout::kLarge;
  const Scenario s =
      generate_scenario(layout, seed, users, parse_overrides(kvs));
  write_file(out_path, serialize_scenario(s));

  // Subarea membership recomputed from the geometry for the summary line.
  std::vector<int> counts;
  if (layout == Layout::kMedium) {
    counts.assign(2, 0);
    for (const auto& u : s.users_m) {
      ++counts[(u.x() < 1000.0 && u.y() < 1000.0) ? 0 : 1];
    }
  } else {
    counts.assign(3, 0);
    for (const auto& u : s.users_m) {
      if (u.x() < 5000.0 && u.y() < 5000.0) {
        ++counts[0];
      } else if (u.x() >= 25000.0 && u.y() >= 25000.0) {
        ++counts[1];
      } else {
        ++counts[2];
      }
    }
  }
  std::cout << "transmitters " << s.n_transmitters() << "\n";
  std::cout << "users_by_subarea";
  for (int c : counts) std::cout << ' ' << c;
  std::cout << "\n";
  return 0;
}

nlohmann::json report_to_json(const SolveReport& rep, Method method) {
  nlohmann::json j;
  j["method"] = method_name(method);
  j["sum_rate_bps"] = rep.rates.sum_rate_bps;
  j["delta"] = rep.delta;
  j["served_by"] = rep.rates.served_by;
  j["per_user_rate_bps"] = std::vector<double>(
      rep.rates.per_user_rate_bps.begin(), rep.rates.per_user_rate_bps.end());
  j["per_tx_power_watts"] = std::vector<double>(
      rep.rates.per_tx_power_watts.begin(),
      rep.rates.per_tx_power_watts.end());
  j["power_violation"] = rep.rates.power_violation;
  j["outer_trace_bps"] = rep.outer_trace_bps;
  j["outer_iterations"] = rep.outer_iterations;
  nlohmann::json alpha = nlohmann::json::array();
  for (int i = 0; i < rep.association.alpha.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int u = 0; u < rep.association.alpha.cols(); ++u) {
      row.push_back(rep.association.alpha(i, u));
    }
    alpha.push_back(std::move(row));
  }
  j["alpha"] = std::move(alpha);
  return j;
}

int cmd_solve(const std::string& scenario_path, const std::string& method_str,
              std::uint64_t seed, double fso_rate, bool has_fso_rate,
              const std::string& out_path) {
  Scenario s = parse_scenario(read_file(scenario_path));
  if (has_fso_rate) s.fso_rate_override_bps = fso_rate;

  SolverParams params;
  params.method = parse_method(method_str);
  params.seed = seed;

  const ChannelSet ch = draw_channels(s, seed);
  const SolveReport rep = algorithm3_solve(s, ch, params);

  write_file(out_path, report_to_json(rep, params.method).dump(2) + "\n");
  std::cout << "sum_rate_mbps " << format_rate_mbps(rep.rates.sum_rate_bps)
            << "\n";
  std::cout << "delta " << format_fixed3(rep.delta) << "\n";
  return 0;
}

int cmd_sweep(const std::string& axis_str, const std::vector<double>& values,
              const std::vector<std::string>& method_strs, int trials,
              std::uint64_t seed, int jobs, const std::string& layout_name,
              int users, const std::vector<std::string>& kvs,
              const std::string& csv_path, const std::string& json_path) {
  SweepSpec spec;
  spec.layout = layout_name == "medium" ? Layout::kMedium : Layout::kLarge;
  spec.n_users = users;
  spec.overrides = parse_overrides(kvs);
  spec.axis = parse_axis(axis_str);
  spec.values = values;
  spec.n_trials = trials;
  spec.params.seed = seed;
  spec.jobs = jobs;
  for (const std::string& m : method_strs) {
    spec.methods.push_back(parse_method(m));
  }

  const SweepResult result = monte_carlo_sweep(spec);
  write_file(csv_path, sweep_to_csv(result));
  write_file(json_path, sweep_summary_json(result));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"integrated satellite-HAPS-ground downlink simulator"};
  app.require_subcommand(1);

  // generate
  std::string gen_layout = "medium";
  int gen_users = 0;
  std::uint64_t gen_seed = 0;
  std::vector<std::string> gen_overrides;
  std::string gen_out = "scenario.json";
  CLI::App* gen = app.add_subcommand("generate", "write a scenario file");
  gen->add_option("--layout", gen_layout)
      ->check(CLI::IsMember({"medium", "large"}));
  gen->add_option("--users", gen_users, "number of users")->required();
  gen->add_option("--seed", gen_seed);
  gen->add_option("--override", gen_overrides, "key=value parameter override");
  gen->add_option("-o,--output", gen_out);

  // solve
  std::string sol_scenario;
  std::string sol_method = "IG_WMMSE";
  std::uint64_t sol_seed = 0;
  double sol_fso_rate = 0.0;
  std::string sol_out = "report.json";
  CLI::App* sol = app.add_subcommand("solve", "solve one scenario");
  sol->add_option("--scenario", sol_scenario, "scenario JSON path")
      ->required();
  sol->add_option("--method", sol_method);
  sol->add_option("--seed", sol_seed);
  CLI::Option* sol_fso_opt =
      sol->add_option("--fso-rate", sol_fso_rate, "backhaul rate override");
  sol->add_option("-o,--output", sol_out);

  // sweep
  std::string sw_axis;
  std::vector<double> sw_values;
  std::vector<std::string> sw_methods = {"IG_WMMSE"};
  int sw_trials = 1;
  std::uint64_t sw_seed = 0;
  int sw_jobs = 1;
  std::string sw_layout = "medium";
  int sw_users = 20;
  std::vector<std::string> sw_overrides;
  std::string sw_csv = "sweep.csv";
  std::string sw_json = "sweep_summary.json";
  CLI::App* sw = app.add_subcommand("sweep", "Monte-Carlo parameter sweep");
  sw->add_option("--axis", sw_axis)
      ->required()
      ->check(CLI::IsMember({"users", "fso_rate", "haps_antennas",
                             "haps_power"}));
  sw->add_option("--values", sw_values)->required()->delimiter(',');
  sw->add_option("--methods", sw_methods)->delimiter(',');
  sw->add_option("--trials", sw_trials);
  sw->add_option("--seed", sw_seed);
  sw->add_option("--jobs", sw_jobs);
  sw->add_option("--layout", sw_layout)
      ->check(CLI::IsMember({"medium", "large"}));
  sw->add_option("--users", sw_users);
  sw->add_option("--override", sw_overrides);
  sw->add_option("--out-csv", sw_csv);
  sw->add_option("--out-json", sw_json);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return cmd_generate(gen_layout, gen_users, gen_seed, gen_overrides,
                          gen_out);
    }
    if (sol->parsed()) {
      return cmd_solve(sol_scenario, sol_method, sol_seed, sol_fso_rate,
                       sol_fso_opt->count() > 0, sol_out);
    }
    if (sw->parsed()) {
      return cmd_sweep(sw_axis, sw_values, sw_methods, sw_trials, sw_seed,
                       sw_jobs, sw_layout, sw_users, sw_overrides, sw_csv,
                       sw_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

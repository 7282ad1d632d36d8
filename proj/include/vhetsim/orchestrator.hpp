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
#include <map>
#include <string>
#include <vector>

#include "vhetsim/association.hpp"
#include "vhetsim/beamforming.hpp"

namespace vhetsim {

// Association strategy x whether WMMSE beamforming runs. IG is the
// assignment-solver association, CD the channel-gain greedy, DD the
// distance greedy; *_only variants keep the initial matched-filter beams.
enum class Method {
  kIgWmmse,
  kCdWmmse,
  kDdWmmse,
  kIgOnly,
  kCdOnly,
  kDdOnly,
};

std::string method_name(Method m);
Method parse_method(const std::string& name);  // throws on unknown names

struct SolverParams {
  double eps_outer = 1e-4;
  double eps_assoc = 1e-4;
  double eps_beam = 1e-4;
  int max_outer = 10;
  int max_assoc = 20;
  int max_beam = 100;
  std::uint64_t seed = 0;
  Method method = Method::kIgWmmse;
};

struct SolveReport {
  Association association;
  BeamformerSet beams;
  RateBreakdown rates;
  double delta = 0.0;  // fraction of users served by the HAPS
  std::vector<double> outer_trace_bps;
  int outer_iterations = 0;
  // Measured but excluded from serialized reports, which must be
  // reproducible byte for byte.
  double wall_ms = 0.0;
};

// Matched-filter initial beams for every pair the data-availability matrix
// allows: w_ij = sqrt(P_i / N_i) h_ij / ||h_ij||, where N_i caps the number
// of links transmitter i could serve at once (antenna count for a BS, the
// user cap for the HAPS), so each transmitter starts exactly at its power
// budget when it has that many candidate links. The seed parameter is
// reserved for randomized initializations; the matched filter ignores it.
BeamformerSet init_beamformers(const ChannelSet& ch, const Scenario& s,
                               std::uint64_t seed);

// Alternating optimization: association step (per the method) then WMMSE
// beamforming, repeated until the true objective settles; the best
// (association, beams) pair under the true objective is reported. Baseline
// associations depend only on geometry/channels and are computed once.
SolveReport algorithm3_solve(const Scenario& s, const ChannelSet& ch,
                             const SolverParams& p);

double compute_delta(const Association& a, const Scenario& s);

enum class SweepAxis { kUsers, kFsoRate, kHapsAntennas, kHapsPower };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);  // throws on unknown names

// One Monte-Carlo experiment: a base layout, one swept parameter, a method
// list, and a trial count per (method, value) cell.
struct SweepSpec {
  Layout layout = Layout::kMedium;
  int n_users = 20;
  std::map<std::string, double> overrides;  // applied before the axis value
  SweepAxis axis = SweepAxis::kUsers;
  std::vector<double> values;
  int n_trials = 1;
  SolverParams params;  // params.seed is the master seed
  std::vector<Method> methods;
  int jobs = 1;
};

struct SweepRow {
  Method method;
  double axis_value = 0.0;
  int trial = 0;
  double sum_rate_bps = 0.0;
  double delta = 0.0;
  int iters = 0;
  double wall_ms = 0.0;  // kept at 0 in serialized output (reproducibility)
};

struct SweepCell {
  Method method;
  double axis_value = 0.0;
  double mean_sum_rate_bps = 0.0;
  double stderr_sum_rate_bps = 0.0;
  double mean_delta = 0.0;
  double stderr_delta = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;    // method-major, then value, then trial
  std::vector<SweepCell> cells;  // one per (method, value)
};

// Runs the sweep. Each (axis value, trial) pair generates one scenario and
// one channel draw from seeds derived off the master seed, shared by all
// methods so method comparisons are paired. Trials may run on a worker
// pool; results are identical for any worker count because seeds depend
// only on indices and rows are reduced in index order.
SweepResult monte_carlo_sweep(const SweepSpec& spec);

std::string sweep_to_csv(const SweepResult& r);
std::string sweep_summary_json(const SweepResult& r);

}  // namespace vhetsim

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

#include "vhetsim/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "vhetsim/random.hpp"

namespace vhetsim {

std::string method_name(Method m) {
  switch (m) {
    case Method::kIgWmmse: return "IG_WMMSE";
    case Method::kCdWmmse: return "CD_WMMSE";
    case Method::kDdWmmse: return "DD_WMMSE";
    case Method::kIgOnly: return "IG_only";
    case Method::kCdOnly: return "CD_only";
    case Method::kDdOnly: return "DD_only";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "IG_WMMSE") return Method::kIgWmmse;
  if (name == "CD_WMMSE") return Method::kCdWmmse;
  if (name == "DD_WMMSE") return Method::kDdWmmse;
  if (name == "IG_only") return Method::kIgOnly;
  if (name == "CD_only") return Method::kCdOnly;
  if (name == "DD_only") return Method::kDdOnly;
  throw std::invalid_argument("unknown method: " + name);
}

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kUsers: return "users";
    case SweepAxis::kFsoRate: return "fso_rate";
    case SweepAxis::kHapsAntennas: return "haps_antennas";
    case SweepAxis::kHapsPower: return "haps_power";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "users") return SweepAxis::kUsers;
  if (name == "fso_rate") return SweepAxis::kFsoRate;
  if (name == "haps_antennas") return SweepAxis::kHapsAntennas;
  if (name == "haps_power") return SweepAxis::kHapsPower;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

BeamformerSet init_beamformers(const ChannelSet& ch, const Scenario& s,
                               std::uint64_t /*seed*/) {
  const int n_tx = ch.n_transmitters();
  const int n_users = ch.n_users();
  BeamformerSet b;
  b.w.assign(n_tx, std::vector<Eigen::VectorXcd>(n_users));

  for (int i = 0; i < n_tx; ++i) {
    int candidates = 0;
    for (int j = 0; j < n_users; ++j) candidates += s.gamma(i, j);
    const int simultaneous =
        i == 0 ? s.haps_user_cap : s.transmitters[i].n_antennas;
    const int n_pot = std::min(candidates, simultaneous);
    if (n_pot == 0) continue;
    const double amp = std::sqrt(s.transmitters[i].p_max_watts / n_pot);
    for (int j = 0; j < n_users; ++j) {
      if (s.gamma(i, j) != 1) continue;
      const double norm = ch.h[i][j].norm();
      if (norm > 0.0) {
        b.w[i][j] = (amp / norm) * ch.h[i][j];
      } else {
        b.w[i][j] = Eigen::VectorXcd::Zero(ch.h[i][j].size());
      }
    }
  }
  return b;
}

double compute_delta(const Association& a, const Scenario& s) {
  if (s.n_users() == 0) return 0.0;
  return static_cast<double>(a.alpha.row(0).sum()) / s.n_users();
}

SolveReport algorithm3_solve(const Scenario& s, const ChannelSet& ch,
                             const SolverParams& p) {
  validate_scenario(s);
  if (!(p.eps_outer > 0.0) || !(p.eps_assoc > 0.0) || !(p.eps_beam > 0.0)) {
    throw std::invalid_argument("solver params: tolerances must be positive");
  }
  if (p.max_outer < 1 || p.max_assoc < 1 || p.max_beam < 1) {
    throw std::invalid_argument("solver params: iteration caps must be >= 1");
  }
  const auto t_start = std::chrono::steady_clock::now();

  const bool use_ig =
      p.method == Method::kIgWmmse || p.method == Method::kIgOnly;
  const bool use_wmmse = p.method == Method::kIgWmmse ||
                         p.method == Method::kCdWmmse ||
                         p.method == Method::kDdWmmse;

  // Baseline associations look only at geometry or channel gains, so one
  // computation serves every outer iteration.
  Association frozen;
  if (p.method == Method::kCdWmmse || p.method == Method::kCdOnly) {
    frozen = baseline_channel(ch, s);
  } else if (p.method == Method::kDdWmmse || p.method == Method::kDdOnly) {
    frozen = baseline_distance(s);
  }

  const BeamformerSet init = init_beamformers(ch, s, p.seed);
  BeamformerSet beams = init;

  SolveReport rep;
  Association prev_assoc;
  double best = -std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (int t = 0; t < p.max_outer; ++t) {
    Association a;
    double rate;
    if (use_ig && use_wmmse && t > 0) {
      // The optimizer only maintains beamformers for currently served
      // links; a candidate link's vector is whatever some earlier
      // association left behind, shrunken or stale. Re-association
      // therefore sees served links through their current beams and every
      // other candidate through its full-power initialization, the rate
      // that transmitter could offer if it re-aimed. The blend can exceed
      // a transmitter's budget, so each one is rescaled back into it.
      BeamformerSet view = init;
      for (int i = 0; i < ch.n_transmitters(); ++i) {
        double used = 0.0;
        for (int j = 0; j < ch.n_users(); ++j) {
          if (prev_assoc.alpha(i, j) == 1) view.w[i][j] = beams.w[i][j];
          used += view.w[i][j].squaredNorm();
        }
        const double cap = s.transmitters[i].p_max_watts;
        if (used > cap) {
          const double scale = std::sqrt(cap / used);
          for (int j = 0; j < ch.n_users(); ++j) view.w[i][j] *= scale;
        }
      }
      AssociationTrace tr =
          algorithm1_associate(ch, view, s, {p.eps_assoc, p.max_assoc});
      // Neither loop of the alternation may regress the true objective,
      // so the outer step follows whichever pair rates higher after
      // beamforming: the incumbent association refined further from its
      // converged vectors, or the re-association candidate given its own
      // pass starting from the blended view. The incumbent branch keeps
      // the monotone climb of the inner loop; the candidate branch lets a
      // different user split win once beamforming has cleaned it up.
      a = prev_assoc;
      beams = algorithm2_beamform(ch, a, beams, s, {p.eps_beam, p.max_beam})
                  .best;
      rate = network_sum_rate(ch, a, beams).sum_rate_bps;
      BeamformerSet cand =
          algorithm2_beamform(ch, tr.best, view, s, {p.eps_beam, p.max_beam})
              .best;
      const double cand_rate =
          network_sum_rate(ch, tr.best, cand).sum_rate_bps;
      if (cand_rate > rate) {
        a = tr.best;
        beams = std::move(cand);
        rate = cand_rate;
      }
    } else {
      a = use_ig
              ? algorithm1_associate(ch, beams, s, {p.eps_assoc, p.max_assoc})
                    .best
              : frozen;
      if (use_wmmse) {
        beams = algorithm2_beamform(ch, a, beams, s, {p.eps_beam, p.max_beam})
                    .best;
      }
      rate = network_sum_rate(ch, a, beams).sum_rate_bps;
    }
    prev_assoc = a;
    rep.outer_trace_bps.push_back(rate);
    if (rate > best) {
      best = rate;
      rep.association = a;
      rep.beams = beams;
    }
    if (t > 0 && std::abs(rate - prev) <= p.eps_outer * std::max(rate, prev)) {
      break;
    }
    prev = rate;
  }

  rep.outer_iterations = static_cast<int>(rep.outer_trace_bps.size());
  rep.rates = network_sum_rate(ch, rep.association, rep.beams, &s);
  rep.delta = compute_delta(rep.association, s);
  rep.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  return rep;
}

namespace {

std::map<std::string, double> axis_overrides(
    const SweepSpec& spec, double value, int* n_users) {
  std::map<std::string, double> ov = spec.overrides;
  *n_users = spec.n_users;
  switch (spec.axis) {
    case SweepAxis::kUsers:
      *n_users = static_cast<int>(std::llround(value));
      break;
    case SweepAxis::kFsoRate:
      ov["fso_rate_override_bps"] = value;
      break;
    case SweepAxis::kHapsAntennas:
      ov["haps_antennas"] = value;
      break;
    case SweepAxis::kHapsPower:
      ov["haps_power_w"] = value;
      break;
  }
  return ov;
}

}  // namespace

SweepResult monte_carlo_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) {
    throw std::invalid_argument("sweep: empty value list");
  }
  if (spec.methods.empty()) {
    throw std::invalid_argument("sweep: empty method list");
  }
  if (spec.n_trials < 1) {
    throw std::invalid_argument("sweep: n_trials must be >= 1");
  }

  const int n_methods = static_cast<int>(spec.methods.size());
  const int n_values = static_cast<int>(spec.values.size());
  const int n_trials = spec.n_trials;

  SweepResult result;
  result.rows.resize(static_cast<std::size_t>(n_methods) * n_values * n_trials);

  // One work item per (value, trial): the scenario and channel draw are
  // shared by all methods so comparisons across methods are paired.
  const int n_items = n_values * n_trials;
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto run_items = [&]() {
    for (;;) {
      const int item = next.fetch_add(1);
      if (item >= n_items) return;
      try {
        const int vi = item / n_trials;
        const int ti = item % n_trials;
        const double value = spec.values[vi];

        int n_users = 0;
        const auto ov = axis_overrides(spec, value, &n_users);
        const std::uint64_t tag_axis = hash_tag(axis_name(spec.axis));
        const std::uint64_t scn_seed =
            derive_seed(spec.params.seed,
                        {hash_tag("scenario"), tag_axis, bits_of(value),
                         static_cast<std::uint64_t>(ti)});
        const std::uint64_t ch_seed =
            derive_seed(spec.params.seed,
                        {hash_tag("channel"), tag_axis, bits_of(value),
                         static_cast<std::uint64_t>(ti)});

        const Scenario s = generate_scenario(spec.layout, scn_seed, n_users, ov);
        const ChannelSet ch = draw_channels(s, ch_seed);

        for (int mi = 0; mi < n_methods; ++mi) {
          SolverParams p = spec.params;
          p.method = spec.methods[mi];
          const SolveReport rep = algorithm3_solve(s, ch, p);

          SweepRow& row =
              result.rows[(static_cast<std::size_t>(mi) * n_values + vi) *
                              n_trials +
                          ti];
          row.method = spec.methods[mi];
          row.axis_value = value;
          row.trial = ti;
          row.sum_rate_bps = rep.rates.sum_rate_bps;
          row.delta = rep.delta;
          row.iters = rep.outer_iterations;
          row.wall_ms = rep.wall_ms;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    run_items();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(run_items);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  // Cell summaries in row order; the standard error uses the sample
  // standard deviation (zero for a single trial).
  for (int mi = 0; mi < n_methods; ++mi) {
    for (int vi = 0; vi < n_values; ++vi) {
      SweepCell cell;
      cell.method = spec.methods[mi];
      cell.axis_value = spec.values[vi];
      double sum_r = 0.0, sum_d = 0.0;
      for (int ti = 0; ti < n_trials; ++ti) {
        const SweepRow& row =
            result.rows[(static_cast<std::size_t>(mi) * n_values + vi) *
                            n_trials +
                        ti];
        sum_r += row.sum_rate_bps;
        sum_d += row.delta;
      }
      cell.mean_sum_rate_bps = sum_r / n_trials;
      cell.mean_delta = sum_d / n_trials;
      if (n_trials > 1) {
        double var_r = 0.0, var_d = 0.0;
        for (int ti = 0; ti < n_trials; ++ti) {
          const SweepRow& row =
              result.rows[(static_cast<std::size_t>(mi) * n_values + vi) *
                              n_trials +
                          ti];
          var_r += std::pow(row.sum_rate_bps - cell.mean_sum_rate_bps, 2);
          var_d += std::pow(row.delta - cell.mean_delta, 2);
        }
        var_r /= n_trials - 1;
        var_d /= n_trials - 1;
        cell.stderr_sum_rate_bps = std::sqrt(var_r / n_trials);
        cell.stderr_delta = std::sqrt(var_d / n_trials);
      }
      result.cells.push_back(cell);
    }
  }
  return result;
}

namespace {

// Shortest digit string that parses back to the same double. Used for CSV
// and JSON alike so every serialized number is reproducible.
std::string format_double(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string sweep_to_csv(const SweepResult& r) {
  std::string out = "method,axis_value,trial,sum_rate_bps,delta,iters,wall_ms\n";
  for (const SweepRow& row : r.rows) {
    out += method_name(row.method);
    out += ',';
    out += format_double(row.axis_value);
    out += ',';
    out += std::to_string(row.trial);
    out += ',';
    out += format_double(row.sum_rate_bps);
    out += ',';
    out += format_double(row.delta);
    out += ',';
    out += std::to_string(row.iters);
    // Wall time is measured per solve but not serialized: output files must
    // not depend on machine load.
    out += ",0\n";
  }
  return out;
}

std::string sweep_summary_json(const SweepResult& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const SweepCell& c : r.cells) {
    cells.push_back({{"method", method_name(c.method)},
                     {"axis_value", c.axis_value},
                     {"mean_sum_rate_bps", c.mean_sum_rate_bps},
                     {"stderr_sum_rate_bps", c.stderr_sum_rate_bps},
                     {"mean_delta", c.mean_delta},
                     {"stderr_delta", c.stderr_delta}});
  }
  nlohmann::json j;
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

}  // namespace vhetsim

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

#include "vhetsim/beamforming.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace vhetsim {

namespace {

constexpr double kEigFloor = 1e-12;  // regularizes singular A_i + mu I

double cross_power(const ChannelSet& ch, const BeamformerSet& b, int tx, int j,
                   int u) {
  if (!b.has(tx, u)) return 0.0;
  return std::norm(ch.h[tx][j].dot(b.w[tx][u]));
}

}  // namespace

WmmseState make_wmmse_state(const ChannelSet& ch, const Association& a) {
  const int n_tx = ch.n_transmitters();
  const int n_users = ch.n_users();
  WmmseState st;
  st.u = Eigen::MatrixXcd::Zero(n_tx, n_users);
  st.rho = Eigen::MatrixXd::Zero(n_tx, n_users);
  st.tau = Eigen::VectorXd::Zero(n_users);
  st.lambda = Eigen::MatrixXi::Ones(n_tx, n_users);
  st.mu = Eigen::VectorXd::Zero(n_tx);
  st.served.assign(n_tx, {});
  for (int i = 0; i < n_tx; ++i) {
    for (int j = 0; j < n_users; ++j) {
      if (a.alpha(i, j) == 1) st.served[i].push_back(j);
    }
  }
  return st;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXi> update_tau_lambda(
    const ChannelSet& ch, const Association& a, const BeamformerSet& b) {
  const int n_tx = ch.n_transmitters();
  const int n_users = ch.n_users();
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(n_users);
  Eigen::MatrixXi lambda = Eigen::MatrixXi::Ones(n_tx, n_users);
  for (int j = 0; j < n_users; ++j) {
    if (a.alpha(0, j) != 1) continue;
    const double rf = rf_rate(ch, a, b, 0, j);
    tau[j] = std::min(rf, ch.fso_rate_bps);
    // The RF link being the bottleneck (ties included) keeps the rate term
    // in the objective; a backhaul-limited link gains nothing from more
    // beam power.
    lambda(0, j) = rf <= ch.fso_rate_bps ? 1 : 0;
  }
  return {std::move(tau), std::move(lambda)};
}

std::complex<double> mmse_receiver(const ChannelSet& ch, const Association& a,
                                   const BeamformerSet& b, int i, int j) {
  const std::complex<double> s = ch.h[i][j].dot(b.w[i][j]);
  double denom = ch.noise_power_watts;
  for (int tx = 0; tx < ch.n_transmitters(); ++tx) {
    for (int l = 0; l < ch.n_users(); ++l) {
      if (a.alpha(tx, l) == 1) denom += cross_power(ch, b, tx, j, l);
    }
  }
  return s / denom;
}

double mse(const ChannelSet& ch, const Association& a, const BeamformerSet& b,
           std::complex<double> u, int i, int j) {
  const std::complex<double> s = ch.h[i][j].dot(b.w[i][j]);
  double e = std::norm(1.0 - std::conj(u) * s);
  const double u2 = std::norm(u);
  for (int tx = 0; tx < ch.n_transmitters(); ++tx) {
    for (int l = 0; l < ch.n_users(); ++l) {
      if (a.alpha(tx, l) != 1 || (tx == i && l == j)) continue;
      e += u2 * cross_power(ch, b, tx, j, l);
    }
  }
  e += ch.noise_power_watts * u2;
  return e;
}

double mse_weight(double e) { return 1.0 / std::max(e, 1e-12); }

void transmit_update(const ChannelSet& ch, WmmseState& st, BeamformerSet& b,
                     int i, double p_max) {
  const std::vector<int>& users_i = st.served[i];
  if (users_i.empty()) {
    st.mu[i] = 0.0;
    return;
  }
  const int na = static_cast<int>(ch.h[i][0].size());

  // Quadratic coupling matrix: every active link's receiver sees
  // transmitter i through h_il, weighted by that link's lambda rho |u|^2.
  Eigen::MatrixXcd quad = Eigen::MatrixXcd::Zero(na, na);
  for (int tx = 0; tx < ch.n_transmitters(); ++tx) {
    for (int l : st.served[tx]) {
      const double wgt =
          st.lambda(tx, l) * st.rho(tx, l) * std::norm(st.u(tx, l));
      if (wgt == 0.0) continue;
      quad.noalias() += wgt * (ch.h[i][l] * ch.h[i][l].adjoint());
    }
  }

  // Work in the eigenbasis of the coupling matrix: the radiated power as a
  // function of mu becomes a simple rational sum, and every bisection step
  // costs O(links x antennas) instead of a fresh solve.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(quad);
  Eigen::VectorXd evals = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXcd& basis = es.eigenvectors();
  const double eval_max = evals.maxCoeff();

  const int m = static_cast<int>(users_i.size());
  Eigen::MatrixXcd coef(na, m);  // numerators in the eigenbasis
  for (int k = 0; k < m; ++k) {
    const int j = users_i[k];
    const std::complex<double> scale =
        static_cast<double>(st.lambda(i, j)) * st.rho(i, j) * st.u(i, j);
    coef.col(k) = basis.adjoint() * (ch.h[i][j] * scale);
  }
  // A link with nonzero numerator has its channel inside the coupling
  // matrix's range, so components along null directions are pure roundoff.
  for (int k = 0; k < m; ++k) {
    for (int n = 0; n < na; ++n) {
      if (evals[n] <= eval_max * 1e-13) coef(n, k) = 0.0;
    }
  }

  auto power_at = [&](double mu) {
    double p = 0.0;
    for (int k = 0; k < m; ++k) {
      for (int n = 0; n < na; ++n) {
        const double den = std::max(evals[n] + mu, kEigFloor);
        p += std::norm(coef(n, k)) / (den * den);
      }
    }
    return p;
  };

  double mu = 0.0;
  if (power_at(0.0) > p_max) {
    // Power is strictly decreasing in mu; find the tight multiplier.
    // The bracket keeps power(hi) <= p_max, so the returned beams never
    // exceed the budget.
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 400 && power_at(hi) > p_max; ++it) hi *= 2.0;
    mu = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double pm = power_at(mid);
      if (std::abs(pm - p_max) <= 1e-8 * p_max) {
        mu = pm <= p_max ? mid : hi;
        break;
      }
      if (pm > p_max) {
        lo = mid;
      } else {
        hi = mid;
        mu = hi;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
  }

  for (int k = 0; k < m; ++k) {
    const int j = users_i[k];
    Eigen::VectorXcd y(na);
    for (int n = 0; n < na; ++n) {
      y[n] = coef(n, k) / std::max(evals[n] + mu, kEigFloor);
    }
    b.w[i][j] = basis * y;
  }
  st.mu[i] = mu;
}

double weighted_sum_rate(const ChannelSet& ch, const Association& a,
                         const BeamformerSet& b,
                         const Eigen::MatrixXi& lambda) {
  double total = 0.0;
  for (int j = 0; j < ch.n_users(); ++j) {
    for (int i = 0; i < ch.n_transmitters(); ++i) {
      if (a.alpha(i, j) != 1) continue;
      if (i == 0 && lambda(0, j) == 0) continue;
      total += rf_rate(ch, a, b, i, j);
    }
  }
  return total;
}

double wmmse_objective(const ChannelSet& ch, const Association& a,
                       const BeamformerSet& b, const WmmseState& st) {
  double total = 0.0;
  for (int i = 0; i < ch.n_transmitters(); ++i) {
    for (int j : st.served[i]) {
      if (st.lambda(i, j) == 0) continue;
      const double e = mse(ch, a, b, st.u(i, j), i, j);
      total += st.rho(i, j) * e - std::log(st.rho(i, j));
    }
  }
  return total;
}

BeamformingResult algorithm2_beamform(const ChannelSet& ch,
                                      const Association& a,
                                      const BeamformerSet& init,
                                      const Scenario& s,
                                      const BeamformingParams& params) {
  BeamformingResult res;
  res.final = init;
  res.state = make_wmmse_state(ch, a);
  WmmseState& st = res.state;
  BeamformerSet& beams = res.final;

  double true_rate = network_sum_rate(ch, a, beams).sum_rate_bps;
  res.best = beams;
  res.best_sum_rate_bps = true_rate;

  std::tie(st.tau, st.lambda) = update_tau_lambda(ch, a, beams);
  res.trace.true_bps.push_back(true_rate);
  res.trace.weighted_bps.push_back(weighted_sum_rate(ch, a, beams, st.lambda));

  for (int it = 0; it < params.max_iters; ++it) {
    if (!params.freeze_lambda && it > 0) {
      std::tie(st.tau, st.lambda) = update_tau_lambda(ch, a, beams);
    }
    for (int i = 0; i < ch.n_transmitters(); ++i) {
      for (int j : st.served[i]) st.u(i, j) = mmse_receiver(ch, a, beams, i, j);
    }
    for (int i = 0; i < ch.n_transmitters(); ++i) {
      for (int j : st.served[i]) {
        st.rho(i, j) = mse_weight(mse(ch, a, beams, st.u(i, j), i, j));
      }
    }
    for (int i = 0; i < ch.n_transmitters(); ++i) {
      transmit_update(ch, st, beams, i, s.transmitters[i].p_max_watts);
    }

    const double prev = true_rate;
    true_rate = network_sum_rate(ch, a, beams).sum_rate_bps;
    res.trace.true_bps.push_back(true_rate);
    res.trace.weighted_bps.push_back(
        weighted_sum_rate(ch, a, beams, st.lambda));
    res.trace.iterations = it + 1;
    if (true_rate > res.best_sum_rate_bps) {
      res.best_sum_rate_bps = true_rate;
      res.best = beams;
    }
    if (std::abs(true_rate - prev) <= params.eps * std::max(true_rate, prev)) {
      res.trace.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace vhetsim

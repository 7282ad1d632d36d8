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

#include "vhetsim/association.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vhetsim {
namespace {

void check_instance(const AssignmentInstance& inst) {
  const int n_tx = inst.n_transmitters();
  const int n_users = inst.n_users();
  if (inst.weight.rows() != n_tx || inst.weight.cols() != n_users ||
      inst.gamma.rows() != n_tx || inst.gamma.cols() != n_users ||
      inst.capacity.size() != n_tx) {
    throw std::invalid_argument("assignment instance: inconsistent shapes");
  }
  if (inst.haps_cap < 0) {
    throw std::invalid_argument("assignment instance: haps_cap must be >= 0");
  }
  if ((inst.profit.array() < 0.0).any() || (inst.weight.array() < 0.0).any()) {
    throw std::invalid_argument(
        "assignment instance: profits and weights must be >= 0");
  }
  if ((inst.capacity.array() <= 0.0).any()) {
    throw std::invalid_argument(
        "assignment instance: capacities must be positive");
  }
}

struct Candidate {
  int tx;
  double profit;
  double weight;
};

struct TxItem {
  int user;
  double profit;
  double weight;
};

// Search state shared across the recursion.
struct KpItem {
  double profit;
  double weight;
  int user;
};

struct BnbContext {
  const AssignmentInstance* inst;
  std::vector<int> order;                       // users in branch order
  std::vector<int> pos;                         // branch position per user
  std::vector<std::vector<Candidate>> cands;    // per user, profit-descending
  std::vector<double> bound_any;   // suffix bound, HAPS slots available
  std::vector<double> bound_no_haps;  // suffix bound, HAPS exhausted
  // Per transmitter: its eligible links, sorted by profit density (used for
  // the fractional-knapsack side of the bound); for the HAPS additionally
  // by plain profit (cardinality side).
  std::vector<std::vector<TxItem>> by_density;
  std::vector<TxItem> haps_by_profit;
  // Per transmitter: the same links sorted by ascending weight, for
  // counting how many more users a transmitter could possibly accept.
  std::vector<std::vector<TxItem>> by_weight;
  // Seat model of the remaining capacities: seat t of transmitter i hosts
  // one more link of weight at most seat_ceiling[i][t], the capacity left
  // after the t lightest undecided weights before it. Any feasible
  // completion maps its rank-t lightest link on i into seat t, so pricing
  // seats rather than transmitters lets the relaxation tell "one heavy
  // user" apart from "several light ones". Ceilings are node-local
  // scratch; prices persist by seat index (any nonnegative price is
  // admissible, refits just sharpen them).
  std::vector<std::vector<double>> seat_ceiling;  // per tx, non-increasing
  std::vector<std::vector<double>> seat_price;
  std::vector<std::vector<double>> seat_pmin;     // prefix minima of prices
  std::vector<double> term;        // per-user priced term of the last bound
  std::vector<double> lam_star;    // root-optimized Lagrangian multipliers
  Eigen::VectorXd remaining;       // per-transmitter capacity left
  std::vector<int> choice;         // chosen tx per branch position, -1 = none
  int haps_left = 0;
  double value = 0.0;
  double best_value = 0.0;
  std::vector<int> best_choice;
  std::vector<KpItem> kp_scratch;  // reused by kp_bound
};

// Transmitter-side admissible bound on the profit still collectable from
// users at branch positions >= k: each transmitter independently fills its
// remaining capacity with its best-density remaining links (fractional
// last item); the HAPS is additionally capped by the sum of its haps_left
// best remaining profits. Every feasible completion splits per transmitter
// into a knapsack solution, so the sum of these relaxations dominates it.
double tx_side_bound(const BnbContext& c, int k) {
  const int n_tx = static_cast<int>(c.by_density.size());
  double total = 0.0;
  for (int i = 0; i < n_tx; ++i) {
    double cap = c.remaining[i];
    double power_part = 0.0;
    for (const TxItem& item : c.by_density[i]) {
      if (c.pos[item.user] < k) continue;  // already decided
      if (item.weight <= cap) {
        power_part += item.profit;
        cap -= item.weight;
      } else {
        power_part += item.profit * (cap / item.weight);
        break;
      }
    }
    if (i == 0) {
      double card_part = 0.0;
      int taken = 0;
      for (const TxItem& item : c.haps_by_profit) {
        if (taken == c.haps_left) break;
        if (c.pos[item.user] < k) continue;
        card_part += item.profit;
        ++taken;
      }
      total += std::min(power_part, card_part);
    } else {
      total += power_part;
    }
  }
  return total;
}

// Links consuming no more than the rounding slack ride along with anything,
// so they get no seat at all: folding them into the seat prefix would prop
// every later ceiling at full capacity and let the relaxation double-book
// the transmitter with two genuinely heavy users. The HAPS is excluded
// because its user slots are counted per link regardless of weight.
bool is_free_rider(const BnbContext& c, int tx, double weight) {
  return tx != 0 && weight <= c.inst->capacity[tx] * 1e-12;
}

// Rebuilds transmitter i's seat ceilings for the subproblem at node k and
// returns how many seats survive. Seat t exists while the t lightest
// remaining seated weights still fit together (any feasible set of t such
// links weighs at least that much); its ceiling is the capacity left after
// the t-1 lighter ones, the loosest weight cap the rank-t member of a
// feasible set can face. The HAPS keeps only its haps_left loosest seats.
int seat_layout(BnbContext& c, int i, int k) {
  std::vector<double>& ceil = c.seat_ceiling[i];
  ceil.clear();
  // The admit rule tolerates a cap*1e-12 overdraft, so allow it here too.
  double cap = c.remaining[i] + c.inst->capacity[i] * 1e-12;
  for (const TxItem& item : c.by_weight[i]) {
    if (c.pos[item.user] < k) continue;
    if (is_free_rider(c, i, item.weight)) continue;
    if (item.weight > cap) break;
    ceil.push_back(cap);
    cap -= item.weight;
  }
  if (i == 0 && static_cast<int>(ceil.size()) > c.haps_left) {
    ceil.resize(c.haps_left);
  }
  return static_cast<int>(ceil.size());
}

// Seats a link of this weight may occupy: ceilings are non-increasing, so
// eligibility is a prefix and its length is found by bisection.
int eligible_seats(const std::vector<double>& ceilings, double weight) {
  const auto it =
      std::partition_point(ceilings.begin(), ceilings.end(),
                           [&](double x) { return x >= weight; });
  return static_cast<int>(it - ceilings.begin());
}

// Seat-priced bound: with any q >= 0 per seat, a completion satisfies
// sum p <= sum_j max(0, max over eligible seats (p - q_seat)) + sum q_seat,
// because each served link sits in a distinct eligible seat and pays that
// seat's price back through the second sum. Each link's best eligible
// price is the prefix minimum at its eligibility cutoff. Rebuilds the seat
// layouts and per-user terms as a side effect; the branching step reuses
// both for its per-child pin tests.
double slot_bound(BnbContext& c, int k) {
  const int n_tx = static_cast<int>(c.by_weight.size());
  const int n = static_cast<int>(c.order.size());
  double total = 0.0;
  for (int i = 0; i < n_tx; ++i) {
    const int count = seat_layout(c, i, k);
    const std::vector<double>& price = c.seat_price[i];
    std::vector<double>& pmin = c.seat_pmin[i];
    pmin.resize(count);
    double run = std::numeric_limits<double>::infinity();
    for (int t = 0; t < count; ++t) {
      const double q = t < static_cast<int>(price.size()) ? price[t] : 0.0;
      total += q;
      run = std::min(run, q);
      pmin[t] = run;
    }
  }
  for (int m = k; m < n; ++m) {
    double best = 0.0;
    for (const Candidate& cand : c.cands[c.order[m]]) {
      double net;
      if (is_free_rider(c, cand.tx, cand.weight)) {
        net = cand.profit;  // rides without a seat, pays no price
      } else {
        const int el = eligible_seats(c.seat_ceiling[cand.tx], cand.weight);
        if (el == 0) continue;
        net = cand.profit - c.seat_pmin[cand.tx][el - 1];
      }
      if (net > best) best = net;
    }
    c.term[c.order[m]] = best;
    total += best;
  }
  return total;
}

// The seat relaxation from node k on is a transportation problem: each
// undecided user supplies one unit, every seat absorbs at most one unit
// from its eligible links at that link's profit, and an uncharged sink
// absorbs the unserved. Solved exactly as a min-cost flow with successive
// shortest paths over the layered graph source -> users -> seats -> sink;
// the final node potentials are an optimal dual, and the seat prices
// extracted from them make slot_bound tight at the fitted node. Sizes
// here are tiny (tens of nodes), so the dense Dijkstra is plenty. Expects
// the seat layouts of node k (slot_bound leaves them behind) and returns
// the relaxed assignment (served transmitter per user, -1 otherwise) for
// incumbent seeding.
struct FlowEdge {
  int to;
  int rev;   // index of the paired reverse edge in g[to]
  int cap;
  double cost;
};

std::vector<int> fit_slot_prices(BnbContext& c, int k) {
  const int n_tx = static_cast<int>(c.by_weight.size());
  const int n_users = static_cast<int>(c.cands.size());
  std::vector<int> seat_base(n_tx + 1, 0);
  for (int i = 0; i < n_tx; ++i) {
    seat_base[i + 1] =
        seat_base[i] + static_cast<int>(c.seat_ceiling[i].size());
  }
  const int n_seats = seat_base[n_tx];
  // One uncapacitated node per transmitter carries its free riders; they
  // charge no capacity, but routing them through a node keeps the served
  // transmitter recoverable from the flow.
  const int kSource = 0;
  const int kSink = n_users + n_seats + n_tx + 1;
  const int n_nodes = kSink + 1;
  const auto user_node = [](int j) { return 1 + j; };
  const auto seat_node = [&](int i, int t) {
    return 1 + n_users + seat_base[i] + t;
  };
  const auto free_node = [&](int i) { return 1 + n_users + n_seats + i; };

  std::vector<std::vector<FlowEdge>> g(n_nodes);
  const auto add_edge = [&](int u, int v, int cap, double cost) {
    g[u].push_back({v, static_cast<int>(g[v].size()), cap, cost});
    g[v].push_back({u, static_cast<int>(g[u].size()) - 1, 0, -cost});
  };
  // The cheapest way into each seat, tracked while the edges are laid
  // down; the graph is layered, so these give exact starting potentials
  // and the first Dijkstra already sees reduced costs >= 0.
  std::vector<double> phi(n_nodes, 0.0);
  int undecided = 0;
  for (int j = 0; j < n_users; ++j) {
    if (c.pos[j] < k) continue;  // decided users stay out of the graph
    ++undecided;
    add_edge(kSource, user_node(j), 1, 0.0);
    add_edge(user_node(j), kSink, 1, 0.0);  // staying unserved is free
    for (const Candidate& cand : c.cands[j]) {
      if (is_free_rider(c, cand.tx, cand.weight)) {
        const int v = free_node(cand.tx);
        add_edge(user_node(j), v, 1, -cand.profit);
        phi[v] = std::min(phi[v], -cand.profit);
        continue;
      }
      const int el = eligible_seats(c.seat_ceiling[cand.tx], cand.weight);
      for (int t = 0; t < el; ++t) {
        const int v = seat_node(cand.tx, t);
        add_edge(user_node(j), v, 1, -cand.profit);
        phi[v] = std::min(phi[v], -cand.profit);
      }
    }
  }
  for (int s = 0; s < n_seats; ++s) {
    add_edge(1 + n_users + s, kSink, 1, 0.0);
    phi[kSink] = std::min(phi[kSink], phi[1 + n_users + s]);
  }
  for (int i = 0; i < n_tx; ++i) {
    add_edge(free_node(i), kSink, n_users, 0.0);
    phi[kSink] = std::min(phi[kSink], phi[free_node(i)]);
  }

  constexpr double kUnreached = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n_nodes);
  std::vector<int> prev_node(n_nodes);
  std::vector<int> prev_edge(n_nodes);
  std::vector<char> settled(n_nodes);
  for (int round = 0; round < undecided; ++round) {
    std::fill(dist.begin(), dist.end(), kUnreached);
    std::fill(settled.begin(), settled.end(), 0);
    dist[kSource] = 0.0;
    for (;;) {
      int u = -1;
      for (int v = 0; v < n_nodes; ++v) {
        if (!settled[v] && dist[v] < kUnreached &&
            (u < 0 || dist[v] < dist[u])) {
          u = v;
        }
      }
      if (u < 0) break;
      settled[u] = 1;
      for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
        const FlowEdge& edge = g[u][e];
        // Settled labels are final; revisiting them on a rounding-level
        // shorter path could knot the predecessor chain into a cycle.
        if (edge.cap <= 0 || settled[edge.to]) continue;
        const double nd = dist[u] + edge.cost + phi[u] - phi[edge.to];
        if (nd < dist[edge.to]) {
          dist[edge.to] = nd;
          prev_node[edge.to] = u;
          prev_edge[edge.to] = e;
        }
      }
    }
    if (dist[kSink] == kUnreached) break;
    for (int v = 0; v < n_nodes; ++v) {
      if (dist[v] < kUnreached) phi[v] += dist[v];
    }
    for (int v = kSink; v != kSource; v = prev_node[v]) {
      FlowEdge& edge = g[prev_node[v]][prev_edge[v]];
      edge.cap -= 1;
      g[v][edge.rev].cap += 1;
    }
  }

  for (int i = 0; i < n_tx; ++i) {
    const int count = static_cast<int>(c.seat_ceiling[i].size());
    c.seat_price[i].resize(count);
    for (int t = 0; t < count; ++t) {
      c.seat_price[i][t] = std::max(0.0, phi[kSink] - phi[seat_node(i, t)]);
    }
  }

  std::vector<int> relaxed(n_users, -1);
  for (int j = 0; j < n_users; ++j) {
    if (c.pos[j] < k) continue;
    for (const FlowEdge& edge : g[user_node(j)]) {
      if (edge.cost > 0.0 || edge.cap != 0) continue;  // skip reverse/unused
      if (edge.to == kSink || edge.to == kSource) continue;
      const int s = edge.to - 1 - n_users;
      if (s >= n_seats) {
        relaxed[j] = s - n_seats;  // served by a free-rider link
      } else {
        relaxed[j] = static_cast<int>(std::upper_bound(seat_base.begin(),
                                                       seat_base.end(), s) -
                                      seat_base.begin()) -
                     1;
      }
      break;
    }
  }
  return relaxed;
}

// Fractional completion bound for the mini knapsacks below; only an
// overestimate when items are sorted by descending profit density, which
// the item builders guarantee. Any cardinality cap is deliberately
// ignored: greedy filling is no longer an upper bound once a count limit
// can displace the density order, so the relaxation drops that constraint
// and the search enforces it exactly instead.
double kp_fractional(const std::vector<KpItem>& items, int idx, double cap) {
  double total = 0.0;
  for (int t = idx; t < static_cast<int>(items.size()); ++t) {
    if (items[t].weight <= cap) {
      total += items[t].profit;
      cap -= items[t].weight;
    } else {
      total += items[t].profit * (cap / std::max(items[t].weight, 1e-300));
      break;
    }
  }
  return total;
}

// Exact mini knapsack as a depth-first search with the fractional bound for
// pruning. The node budget guards against adversarial weight mixes; when it
// runs out the caller falls back to the fractional root bound, which stays
// an overestimate, so outer bounds remain admissible either way. The mask
// records the chosen item set for callers that need it.
void kp_dfs(const std::vector<KpItem>& items, int idx, double cap, int card,
            double value, std::uint32_t mask, double& best,
            std::uint32_t& best_mask, long long& budget) {
  if (value > best) {
    best = value;
    best_mask = mask;
  }
  if (idx == static_cast<int>(items.size()) || card == 0 || budget <= 0)
    return;
  --budget;
  if (value + kp_fractional(items, idx, cap) <= best) return;
  if (items[idx].weight <= cap) {
    kp_dfs(items, idx + 1, cap - items[idx].weight, card - 1,
           value + items[idx].profit, mask | (1u << idx), best, best_mask,
           budget);
  }
  kp_dfs(items, idx + 1, cap, card, value, mask, best, best_mask, budget);
}

// Collects transmitter i's undecided links with positive reduced profit
// that individually fit, sorted by reduced-profit density (zero weights
// first). Returns the capacity with rounding slack applied.
double kp_items(const BnbContext& c, int i, int k,
                const std::vector<double>& lam, std::vector<KpItem>& items) {
  const double cap = c.remaining[i] + c.inst->capacity[i] * 1e-12;
  items.clear();
  for (const TxItem& it : c.by_density[i]) {
    if (c.pos[it.user] < k) continue;
    const double rp = it.profit - lam[it.user];
    if (rp <= 0.0 || it.weight > cap) continue;
    items.push_back({rp, it.weight, it.user});
  }
  std::sort(items.begin(), items.end(), [](const KpItem& a, const KpItem& b) {
    const bool a_free = a.weight <= 0.0;
    const bool b_free = b.weight <= 0.0;
    if (a_free != b_free) return a_free;
    if (a_free) return a.profit > b.profit;
    return a.profit * b.weight > b.profit * a.weight;
  });
  return cap;
}

double kp_upper(BnbContext& c, int i, int k, const std::vector<double>& lam) {
  const double cap = kp_items(c, i, k, lam, c.kp_scratch);
  if (c.kp_scratch.empty()) return 0.0;
  const int card =
      i == 0 ? c.haps_left : static_cast<int>(c.kp_scratch.size());
  const double fallback = kp_fractional(c.kp_scratch, 0, cap);
  long long budget = 600;
  double best = 0.0;
  std::uint32_t mask = 0;
  kp_dfs(c.kp_scratch, 0, cap, card, 0.0, 0, best, mask, budget);
  return budget > 0 ? best : fallback;
}

// Lagrangian bound with per-user multipliers lam >= 0: every completion
// satisfies
//   sum p <= sum_j lam_j + sum_i KP_i(p_ij - lam_j),
// since each transmitter's served set is knapsack-feasible and dropping
// negative reduced profits only helps. The exact knapsacks see the joint
// weight of a served set, the blind spot of the independently-filled
// seats, so this is the bound that refuses a heavy pair the seat model
// happily double-books. Any multipliers are admissible, so optimized root
// multipliers stay valid down the whole tree.
double kp_bound(BnbContext& c, int k, const std::vector<double>& lam) {
  const int n_tx = static_cast<int>(c.by_density.size());
  const int n = static_cast<int>(c.order.size());
  double total = 0.0;
  for (int m = k; m < n; ++m) total += lam[c.order[m]];
  for (int i = 0; i < n_tx; ++i) total += kp_upper(c, i, k, lam);
  return total;
}

// One evaluation of the Lagrangian dual at the root: exact knapsack per
// transmitter on reduced profits, remembering the chosen users so the
// caller can take subgradient steps and harvest feasible assignments.
// kp_val[i] is an upper value for transmitter i's knapsack (exact unless
// the node budget ran out), chosen[i] the best integer set found.
double eval_kp_dual(BnbContext& c, const std::vector<double>& lam,
                    std::vector<double>& kp_val,
                    std::vector<std::vector<int>>& chosen) {
  const int n_tx = static_cast<int>(c.by_density.size());
  const int n_users = static_cast<int>(c.order.size());
  kp_val.assign(n_tx, 0.0);
  chosen.assign(n_tx, {});
  double total = 0.0;
  for (int j = 0; j < n_users; ++j) total += lam[j];
  for (int i = 0; i < n_tx; ++i) {
    const double cap = kp_items(c, i, 0, lam, c.kp_scratch);
    if (c.kp_scratch.empty()) continue;
    const int card =
        i == 0 ? c.haps_left : static_cast<int>(c.kp_scratch.size());
    long long budget = 20000;
    double best = 0.0;
    std::uint32_t mask = 0;
    kp_dfs(c.kp_scratch, 0, cap, card, 0.0, 0, best, mask, budget);
    kp_val[i] =
        budget > 0 ? best : kp_fractional(c.kp_scratch, 0, cap);
    for (int t = 0; t < static_cast<int>(c.kp_scratch.size()); ++t) {
      if (mask & (1u << t)) chosen[i].push_back(c.kp_scratch[t].user);
    }
    total += kp_val[i];
  }
  return total;
}

// True when every transmitter could absorb all of its still-eligible links
// at once (the HAPS only needs this while it has user slots left). The
// power constraints are then vacuous over the remaining subproblem, so the
// transportation relaxation coincides with it and the fitted flow is an
// exact optimum of the subtree rather than a bound. Deep nodes land here
// all the time once the heavy links are decided, collapsing what would
// otherwise be the bushiest part of the search into one flow solve.
bool tail_is_exact(const BnbContext& c, int k) {
  const int n_tx = static_cast<int>(c.by_weight.size());
  const int n_users = static_cast<int>(c.cands.size());
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n_tx);
  for (int j = 0; j < n_users; ++j) {
    if (c.pos[j] < k) continue;
    for (const Candidate& cand : c.cands[j]) {
      if (cand.weight <=
          c.remaining[cand.tx] + c.inst->capacity[cand.tx] * 1e-12) {
        load[cand.tx] += cand.weight;
      }
    }
  }
  for (int i = 0; i < n_tx; ++i) {
    if (i == 0 && c.haps_left == 0) continue;
    if (load[i] > c.remaining[i] + c.inst->capacity[i] * 1e-12) return false;
  }
  return true;
}

void bnb_dfs(BnbContext& c, int k) {
  const int n = static_cast<int>(c.order.size());
  if (k == n) {
    if (c.value > c.best_value) {
      c.best_value = c.value;
      c.best_choice = c.choice;
    }
    return;
  }
  // Cheapest bound first, sharper ones only when the previous fails to
  // prune. Any one at or below the incumbent kills the subtree.
  const double user_bound =
      c.haps_left > 0 ? c.bound_any[k] : c.bound_no_haps[k];
  if (c.value + user_bound <= c.best_value) return;
  double dual = slot_bound(c, k);
  if (c.value + dual <= c.best_value) return;
  if (c.value + kp_bound(c, k, c.lam_star) <= c.best_value) return;
  if (c.value + kp_bound(c, k, c.term) <= c.best_value) return;
  if (c.value + tx_side_bound(c, k) <= c.best_value) return;

  // Every bound failed, so this subtree gets branched; re-price it first.
  // Prices fitted anywhere stay valid everywhere, restoring on exit merely
  // keeps the ancestor's sharper fit for its remaining children. The flow
  // only spans the undecided users, so refits shrink with depth.
  bool refit = false;
  std::vector<std::vector<double>> saved_price;
  if (k > 0) {
    saved_price = c.seat_price;
    const std::vector<int> relaxed =
        fit_slot_prices(c, k);  // seat layouts left by slot_bound
    refit = true;
    if (tail_is_exact(c, k)) {
      double rest = 0.0;
      for (int j = 0; j < static_cast<int>(c.pos.size()); ++j) {
        if (c.pos[j] >= k && relaxed[j] >= 0)
          rest += c.inst->profit(relaxed[j], j);
      }
      if (c.value + rest > c.best_value) {
        c.best_value = c.value + rest;
        c.best_choice = c.choice;
        for (int j = 0; j < static_cast<int>(c.pos.size()); ++j) {
          if (c.pos[j] >= k) c.best_choice[c.pos[j]] = relaxed[j];
        }
      }
      c.seat_price = saved_price;
      return;
    }
    dual = slot_bound(c, k);
    if (c.value + dual <= c.best_value ||
        c.value + kp_bound(c, k, c.term) <= c.best_value) {
      c.seat_price = saved_price;
      return;
    }
  }

  const int user = c.order[k];
  // Pinning this user's choice replaces its term in the priced bound, which
  // often disposes of a child without the descent: serving user j from a
  // seat of transmitter i caps the subtree at dual - term_j + (p_ij - q),
  // leaving the user out caps it at dual - term_j. The nets are captured
  // now because recursion rebuilds the seat scratch for other nodes.
  const double pinned_base = dual - c.term[user];
  std::vector<double> net_pin(c.cands[user].size());
  for (int idx = 0; idx < static_cast<int>(c.cands[user].size()); ++idx) {
    const Candidate& cand = c.cands[user][idx];
    if (is_free_rider(c, cand.tx, cand.weight)) {
      net_pin[idx] = cand.profit;
      continue;
    }
    const int el = eligible_seats(c.seat_ceiling[cand.tx], cand.weight);
    net_pin[idx] = el == 0 ? -std::numeric_limits<double>::infinity()
                           : cand.profit - c.seat_pmin[cand.tx][el - 1];
  }
  for (int idx = 0; idx < static_cast<int>(c.cands[user].size()); ++idx) {
    const Candidate& cand = c.cands[user][idx];
    if (cand.tx == 0 && c.haps_left == 0) continue;
    // Tiny relative slack so capacities assembled from sums of the same
    // weights are not rejected by rounding.
    const double slack = c.inst->capacity[cand.tx] * 1e-12;
    if (cand.weight > c.remaining[cand.tx] + slack) continue;
    if (c.value + pinned_base + net_pin[idx] <= c.best_value) continue;

    c.remaining[cand.tx] -= cand.weight;
    if (cand.tx == 0) --c.haps_left;
    c.value += cand.profit;
    c.choice[k] = cand.tx;

    bnb_dfs(c, k + 1);

    c.choice[k] = -1;
    c.value -= cand.profit;
    if (cand.tx == 0) ++c.haps_left;
    c.remaining[cand.tx] += cand.weight;
  }
  // Leaving the user unassigned remains an option when it can still win.
  if (c.value + pinned_base > c.best_value) bnb_dfs(c, k + 1);
  if (refit) c.seat_price = saved_price;
}

}  // namespace

Association solve_assignment_bnb(const AssignmentInstance& inst) {
  check_instance(inst);
  const int n_tx = inst.n_transmitters();
  const int n_users = inst.n_users();

  BnbContext c;
  c.inst = &inst;
  c.cands.resize(n_users);
  for (int j = 0; j < n_users; ++j) {
    for (int i = 0; i < n_tx; ++i) {
      // Zero-profit options are dominated by non-assignment, which also
      // spends no capacity; dropping them breaks ties toward leaving the
      // user out.
      if (inst.gamma(i, j) == 1 && inst.profit(i, j) > 0.0) {
        c.cands[j].push_back({i, inst.profit(i, j), inst.weight(i, j)});
      }
    }
    std::sort(c.cands[j].begin(), c.cands[j].end(),
              [](const Candidate& a, const Candidate& b) {
                if (a.profit != b.profit) return a.profit > b.profit;
                return a.tx < b.tx;
              });
  }

  // Branch first on the users with the most to lose: largest gap between
  // their best and second-best option (non-assignment counts as an option).
  std::vector<double> spread(n_users, 0.0);
  for (int j = 0; j < n_users; ++j) {
    if (c.cands[j].empty()) continue;
    const double p1 = c.cands[j][0].profit;
    const double p2 = c.cands[j].size() > 1 ? c.cands[j][1].profit : 0.0;
    spread[j] = p1 - p2;
  }
  c.order.resize(n_users);
  for (int j = 0; j < n_users; ++j) c.order[j] = j;
  std::sort(c.order.begin(), c.order.end(), [&](int a, int b) {
    if (spread[a] != spread[b]) return spread[a] > spread[b];
    return a < b;
  });

  // Suffix bounds: each remaining user contributes its best profit with the
  // knapsacks ignored; the no-HAPS variant applies once the cap is spent.
  const auto rebuild_suffix_bounds = [&]() {
    c.bound_any.assign(n_users + 1, 0.0);
    c.bound_no_haps.assign(n_users + 1, 0.0);
    for (int k = n_users - 1; k >= 0; --k) {
      const int user = c.order[k];
      double best_any = 0.0;
      double best_no_haps = 0.0;
      for (const Candidate& cand : c.cands[user]) {
        best_any = std::max(best_any, cand.profit);
        if (cand.tx != 0) best_no_haps = std::max(best_no_haps, cand.profit);
      }
      c.bound_any[k] = c.bound_any[k + 1] + best_any;
      c.bound_no_haps[k] = c.bound_no_haps[k + 1] + best_no_haps;
    }
  };

  c.pos.assign(n_users, 0);
  for (int k = 0; k < n_users; ++k) c.pos[c.order[k]] = k;

  // Transmitter-side views of the same candidates. Zero-weight links sort
  // first (infinite density), the rest by profit per unit of capacity.
  const auto rebuild_tx_views = [&]() {
    c.by_density.assign(n_tx, {});
    for (int j = 0; j < n_users; ++j) {
      for (const Candidate& cand : c.cands[j]) {
        c.by_density[cand.tx].push_back({j, cand.profit, cand.weight});
      }
    }
    for (auto& items : c.by_density) {
      std::sort(items.begin(), items.end(),
                [](const TxItem& a, const TxItem& b) {
                  const bool a_free = a.weight <= 0.0;
                  const bool b_free = b.weight <= 0.0;
                  if (a_free != b_free) return a_free;
                  if (a_free) return a.profit > b.profit;
                  return a.profit * b.weight > b.profit * a.weight;
                });
    }
    c.haps_by_profit = c.by_density[0];
    std::sort(
        c.haps_by_profit.begin(), c.haps_by_profit.end(),
        [](const TxItem& a, const TxItem& b) { return a.profit > b.profit; });

    c.by_weight = c.by_density;
    for (auto& items : c.by_weight) {
      std::sort(items.begin(), items.end(),
                [](const TxItem& a, const TxItem& b) {
                  if (a.weight != b.weight) return a.weight < b.weight;
                  return a.user < b.user;
                });
    }
  };
  rebuild_suffix_bounds();
  rebuild_tx_views();
  c.seat_ceiling.assign(n_tx, {});
  c.seat_price.assign(n_tx, {});
  c.seat_pmin.assign(n_tx, {});
  c.term.assign(n_users, 0.0);

  c.remaining = inst.capacity;
  c.haps_left = inst.haps_cap;
  c.choice.assign(n_users, -1);
  c.best_choice = c.choice;

  for (int i = 0; i < n_tx; ++i) seat_layout(c, i, 0);
  const std::vector<int> relaxed = fit_slot_prices(c, 0);
  const double root_dual = slot_bound(c, 0);  // prices in, terms out

  // A link's discounted worth under the fitted prices: profit minus the
  // cheapest seat it can occupy, undiscounted for free riders.
  const auto net_of = [&](const Candidate& cand) {
    if (is_free_rider(c, cand.tx, cand.weight)) return cand.profit;
    const int el = eligible_seats(c.seat_ceiling[cand.tx], cand.weight);
    return el == 0 ? -std::numeric_limits<double>::infinity()
                   : cand.profit - c.seat_pmin[cand.tx][el - 1];
  };

  // Re-sort each user's options by discounted profit so the first dive of
  // the search already accounts for how contested each transmitter is.
  // Order only affects which optimum is found first, not its value.
  for (int j = 0; j < n_users; ++j) {
    std::sort(c.cands[j].begin(), c.cands[j].end(),
              [&](const Candidate& a, const Candidate& b) {
                const double net_a = net_of(a);
                const double net_b = net_of(b);
                if (net_a != net_b) return net_a > net_b;
                if (a.profit != b.profit) return a.profit > b.profit;
                return a.tx < b.tx;
              });
  }

  // Repair the relaxed assignment into a feasible starting incumbent:
  // relaxed winners keep their transmitter while it still fits, highest
  // profits first; whoever got bumped then takes its most profitable
  // alternative that fits. Starting close to the optimum lets the bounds
  // prune from the very first branches.
  {
    std::vector<int> served;
    for (int j = 0; j < n_users; ++j) {
      if (relaxed[j] >= 0) served.push_back(j);
    }
    std::sort(served.begin(), served.end(), [&](int a, int b) {
      const double pa = inst.profit(relaxed[a], a);
      const double pb = inst.profit(relaxed[b], b);
      if (pa != pb) return pa > pb;
      if (relaxed[a] != relaxed[b]) return relaxed[a] < relaxed[b];
      return a < b;
    });
    Eigen::VectorXd rem = inst.capacity;
    int haps_left = inst.haps_cap;
    std::vector<int> pick(n_users, -1);
    const auto fits = [&](int i, double w) {
      if (i == 0 && haps_left == 0) return false;
      return w <= rem[i] + inst.capacity[i] * 1e-12;
    };
    const auto place = [&](int j, int i) {
      rem[i] -= inst.weight(i, j);
      if (i == 0) --haps_left;
      pick[j] = i;
    };
    for (int j : served) {
      if (fits(relaxed[j], inst.weight(relaxed[j], j))) place(j, relaxed[j]);
    }
    for (int j = 0; j < n_users; ++j) {
      if (pick[j] >= 0) continue;
      int arg = -1;
      double best_p = 0.0;
      for (const Candidate& cand : c.cands[j]) {
        if (cand.profit > best_p && fits(cand.tx, cand.weight)) {
          arg = cand.tx;
          best_p = cand.profit;
        }
      }
      if (arg >= 0) place(j, arg);
    }
    for (int j = 0; j < n_users; ++j) {
      if (pick[j] < 0) continue;
      c.best_value += inst.profit(pick[j], j);
      c.best_choice[c.pos[j]] = pick[j];
    }
  }

  // Optimize the Lagrangian multipliers by projected subgradient steps,
  // warm-started at the per-user terms of the seat dual. Each evaluation
  // also yields per-transmitter knapsack solutions; resolving their user
  // overlaps by keeping the most profitable copy gives a feasible
  // assignment, which routinely beats the repaired seed as an incumbent.
  // The best multipliers found are kept for bounding the whole tree.
  c.lam_star = c.term;
  {
    std::vector<double> lam = c.term;
    std::vector<double> kp_val;
    std::vector<std::vector<int>> chosen;
    std::vector<int> pick(n_users);
    std::vector<int> count(n_users);
    double best_dual = std::numeric_limits<double>::infinity();
    double theta = 2.0;
    int stall = 0;
    for (int it = 0; it < 400; ++it) {
      const double dual_val = eval_kp_dual(c, lam, kp_val, chosen);
      if (dual_val < best_dual) {
        best_dual = dual_val;
        c.lam_star = lam;
        stall = 0;
      } else if (++stall >= 25) {
        theta *= 0.5;
        stall = 0;
      }

      std::fill(pick.begin(), pick.end(), -1);
      std::fill(count.begin(), count.end(), 0);
      for (int i = 0; i < n_tx; ++i) {
        for (int j : chosen[i]) {
          ++count[j];
          if (pick[j] < 0 || inst.profit(i, j) > inst.profit(pick[j], j))
            pick[j] = i;
        }
      }
      double heur = 0.0;
      for (int j = 0; j < n_users; ++j) {
        if (pick[j] >= 0) heur += inst.profit(pick[j], j);
      }
      if (heur > c.best_value) {
        c.best_value = heur;
        c.best_choice.assign(n_users, -1);
        for (int j = 0; j < n_users; ++j) {
          if (pick[j] >= 0) c.best_choice[c.pos[j]] = pick[j];
        }
      }

      const double gap = best_dual - c.best_value;
      if (gap <= 1e-9 * std::max(1.0, std::abs(best_dual))) break;
      double gnorm2 = 0.0;
      for (int j = 0; j < n_users; ++j) {
        const double g = 1.0 - count[j];
        gnorm2 += g * g;
      }
      if (gnorm2 == 0.0 || theta < 1e-3) break;
      const double step = theta * gap / gnorm2;
      for (int j = 0; j < n_users; ++j) {
        lam[j] = std::max(0.0, lam[j] - step * (1.0 - count[j]));
      }
    }
  }

  // Reduced-cost fixing: pinning user j to link (i, j) caps every solution
  // at dual - term_j + net_ij under the seat prices, and at
  //   L(lam*) - KP_i + (p_ij - lam*_j) + KP_i(without j, cap - w_ij)
  // under the optimized multipliers, where the modified knapsack forces
  // the pinned link in. Links that cannot strictly beat the incumbent
  // under either pin are deleted outright. Beyond skipping those branches,
  // the deletions tighten every seat layout and suffix bound used later,
  // so the derived structures get rebuilt.
  {
    std::vector<double> kp_star;
    std::vector<std::vector<int>> chosen;
    const double star_dual = eval_kp_dual(c, c.lam_star, kp_star, chosen);
    std::vector<std::vector<KpItem>> star_items(n_tx);
    std::vector<double> star_cap(n_tx);
    for (int i = 0; i < n_tx; ++i) {
      star_cap[i] = kp_items(c, i, 0, c.lam_star, star_items[i]);
    }
    std::vector<KpItem> forced_items;
    const auto forced_pin = [&](const Candidate& cand, int j) {
      const double w = inst.weight(cand.tx, j);
      const double cap_left = star_cap[cand.tx] - w;
      if (cap_left < 0.0) return -std::numeric_limits<double>::infinity();
      if (cand.tx == 0 && inst.haps_cap == 0)
        return -std::numeric_limits<double>::infinity();
      forced_items.clear();
      for (const KpItem& it : star_items[cand.tx]) {
        if (it.user == j || it.weight > cap_left) continue;
        forced_items.push_back(it);
      }
      const int card = cand.tx == 0 ? inst.haps_cap - 1
                                    : static_cast<int>(forced_items.size());
      double best = 0.0;
      std::uint32_t mask = 0;
      long long budget = 5000;
      kp_dfs(forced_items, 0, cap_left, card, 0.0, 0, best, mask, budget);
      const double rest =
          budget > 0 ? best : kp_fractional(forced_items, 0, cap_left);
      return star_dual - kp_star[cand.tx] +
             (cand.profit - c.lam_star[j]) + rest;
    };
    for (int j = 0; j < n_users; ++j) {
      const double keep_above = c.best_value - root_dual + c.term[j];
      std::vector<Candidate>& v = c.cands[j];
      v.erase(std::remove_if(v.begin(), v.end(),
                             [&](const Candidate& cand) {
                               if (net_of(cand) <= keep_above) return true;
                               return forced_pin(cand, j) <= c.best_value;
                             }),
              v.end());
    }
  }
  rebuild_suffix_bounds();
  rebuild_tx_views();

  bnb_dfs(c, 0);

  Association out;
  out.alpha = Eigen::MatrixXi::Zero(n_tx, n_users);
  for (int k = 0; k < n_users; ++k) {
    if (c.best_choice[k] >= 0) out.alpha(c.best_choice[k], c.order[k]) = 1;
  }
  return out;
}

namespace {

AssignmentInstance instance_skeleton(const ChannelSet& ch,
                                     const BeamformerSet& b,
                                     const Scenario& s) {
  const int n_tx = ch.n_transmitters();
  const int n_users = ch.n_users();
  AssignmentInstance inst;
  inst.profit = Eigen::MatrixXd::Zero(n_tx, n_users);
  inst.weight = Eigen::MatrixXd::Zero(n_tx, n_users);
  inst.capacity.resize(n_tx);
  for (int i = 0; i < n_tx; ++i) {
    inst.capacity[i] = s.transmitters[i].p_max_watts;
    for (int j = 0; j < n_users; ++j) {
      if (b.has(i, j)) inst.weight(i, j) = b.w[i][j].squaredNorm();
    }
  }
  inst.haps_cap = s.haps_user_cap;
  inst.gamma = s.gamma;
  return inst;
}

// True HAPS rate user j would see under the current association's
// interference, capped by the backhaul.
Eigen::VectorXd true_haps_rates(const ChannelSet& ch, const Association& a,
                                const BeamformerSet& b) {
  Eigen::VectorXd t(ch.n_users());
  for (int j = 0; j < ch.n_users(); ++j) {
    t[j] = std::min(rf_rate(ch, a, b, 0, j), ch.fso_rate_bps);
  }
  return t;
}

}  // namespace

Association solve_ilp_seed(const ChannelSet& ch, const BeamformerSet& b,
                           const Scenario& s) {
  AssignmentInstance inst = instance_skeleton(ch, b, s);
  for (int j = 0; j < ch.n_users(); ++j) {
    inst.profit(0, j) =
        std::min(full_interference_rate(ch, b, 0, j), ch.fso_rate_bps);
    for (int i = 1; i < ch.n_transmitters(); ++i) {
      inst.profit(i, j) = full_interference_rate(ch, b, i, j);
    }
  }
  return solve_assignment_bnb(inst);
}

AssociationTrace algorithm1_associate(const ChannelSet& ch,
                                      const BeamformerSet& b,
                                      const Scenario& s,
                                      const AssociationParams& params) {
  AssociationTrace trace;

  Association alpha = solve_ilp_seed(ch, b, s);
  double rate = network_sum_rate(ch, alpha, b).sum_rate_bps;
  trace.sum_rate_bps.push_back(rate);
  trace.t0.push_back(true_haps_rates(ch, alpha, b));
  trace.best = alpha;
  trace.best_sum_rate_bps = rate;

  // Refinement: optimistic interference-free profits for ground BSs, the
  // latest true-rate values for the HAPS. The incumbent only moves when the
  // true objective improves.
  AssignmentInstance inst = instance_skeleton(ch, b, s);
  for (int i = 1; i < ch.n_transmitters(); ++i) {
    for (int j = 0; j < ch.n_users(); ++j) {
      inst.profit(i, j) = interference_free_rate(ch, b, i, j);
    }
  }

  for (int m = 0; m < params.max_iters; ++m) {
    inst.profit.row(0) = trace.t0.back().transpose();
    alpha = solve_assignment_bnb(inst);

    const double prev = rate;
    rate = network_sum_rate(ch, alpha, b).sum_rate_bps;
    trace.sum_rate_bps.push_back(rate);
    trace.t0.push_back(true_haps_rates(ch, alpha, b));
    if (rate > trace.best_sum_rate_bps) {
      trace.best_sum_rate_bps = rate;
      trace.best = alpha;
    }
    if (std::abs(rate - prev) <= params.eps * std::max(rate, prev)) break;
  }
  return trace;
}

namespace {

// Shared greedy matcher: repeatedly picks the extreme remaining score among
// (eligible transmitter, unassigned user) pairs. Scan order makes ties land
// on the lowest transmitter index, then the lowest user index.
Association greedy_match(const Eigen::MatrixXd& score, const Scenario& s,
                         bool pick_smallest) {
  const int n_tx = s.n_transmitters();
  const int n_users = s.n_users();

  std::vector<int> slots(n_tx);
  slots[0] = s.haps_user_cap;
  for (int i = 1; i < n_tx; ++i) slots[i] = s.transmitters[i].n_antennas;

  Association out;
  out.alpha = Eigen::MatrixXi::Zero(n_tx, n_users);
  std::vector<bool> assigned(n_users, false);

  for (;;) {
    int best_i = -1, best_j = -1;
    double best = pick_smallest ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_tx; ++i) {
      if (slots[i] == 0) continue;
      for (int j = 0; j < n_users; ++j) {
        if (assigned[j] || s.gamma(i, j) != 1) continue;
        const double v = score(i, j);
        if (pick_smallest ? v < best : v > best) {
          best = v;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_i < 0) break;
    out.alpha(best_i, best_j) = 1;
    assigned[best_j] = true;
    --slots[best_i];
  }
  return out;
}

}  // namespace

Association baseline_distance(const Scenario& s) {
  Eigen::MatrixXd d(s.n_transmitters(), s.n_users());
  for (int i = 0; i < s.n_transmitters(); ++i) {
    for (int j = 0; j < s.n_users(); ++j) {
      d(i, j) = (s.transmitters[i].position_m - s.users_m[j]).norm();
    }
  }
  return greedy_match(d, s, /*pick_smallest=*/true);
}

Association baseline_channel(const ChannelSet& ch, const Scenario& s) {
  Eigen::MatrixXd g(ch.n_transmitters(), ch.n_users());
  for (int i = 0; i < ch.n_transmitters(); ++i) {
    for (int j = 0; j < ch.n_users(); ++j) {
      g(i, j) = ch.h[i][j].squaredNorm();
    }
  }
  return greedy_match(g, s, /*pick_smallest=*/false);
}

}  // namespace vhetsim

#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls the solvers it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "hetnet/cro.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/pricing.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet::testing {

inline ScenarioConfig small_config(std::size_t n_users, std::size_t n_sbs) {
  ScenarioConfig c;
  c.n_users = n_users;
  c.n_sbs = n_sbs;
  return c;
}

/// Rate actually delivered, computed from scratch.
inline double shannon_rate(double p, double w, double gain, double n0) {
  return w * std::log2(1.0 + p * gain * gain / n0);
}

/// min over p of c_p p + beta R / log2(1 + p k): convex in p, so a ternary
/// search on [0, p_max] converges. Returns {p, w, cost without price}.
struct OracleLink {
  double p = 0.0;
  double w = 0.0;
  double cost = 0.0;  // c_p p + bw_cost w
};

inline OracleLink oracle_link(double rate, double k, double p_max, double c_p, double bw_cost,
                              double price) {
  const double beta = bw_cost + price;
  auto f = [&](double p) { return c_p * p + beta * rate / std::log2(1.0 + p * k); };
  double lo = 0.0;
  double hi = p_max;
  for (int it = 0; it < 400; ++it) {
    const double a = lo + (hi - lo) / 3.0;
    const double b = hi - (hi - lo) / 3.0;
    if (f(a) <= f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  OracleLink out;
  out.p = 0.5 * (lo + hi);
  out.w = rate / std::log2(1.0 + out.p * k);
  out.cost = c_p * out.p + bw_cost * out.w;
  return out;
}

/// Separable CRO solved by plain bisection on the bandwidth price.
struct OracleCro {
  double cost = 0.0;
  double total_w = 0.0;
  double nu = 0.0;
};

inline OracleCro oracle_cro(const Scenario& sc, const std::vector<std::size_t>& users) {
  const StationParams& m = sc.mbs;
  auto at = [&](double nu) {
    OracleCro r;
    r.nu = nu;
    for (std::size_t i : users) {
      const User& u = sc.users[i];
      const double g = u.gain_to(m.id);
      const double rate = u.r_th * (1.0 - u.delta_r);
      const OracleLink l =
          oracle_link(rate, g * g / u.mean_noise, m.p_max, m.c_p, m.gamma * m.c_w, nu);
      r.cost += l.cost;
      r.total_w += l.w;
    }
    return r;
  };
  OracleCro r = at(0.0);
  if (r.total_w <= m.w_max) return r;
  double lo = 0.0;
  double hi = m.gamma * m.c_w + 1e-12;
  while (at(hi).total_w > m.w_max) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (at(mid).total_w > m.w_max) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(hi);
}

/// Full-power bandwidth need of each user, summed.
inline double min_bandwidth_sum(const Scenario& sc, const std::vector<std::size_t>& users) {
  double total = 0.0;
  for (std::size_t i : users) {
    const User& u = sc.users[i];
    const double g = u.gain_to(sc.mbs.id);
    total += u.r_th * (1.0 - u.delta_r) / std::log2(1.0 + sc.mbs.p_max * g * g / u.mean_noise);
  }
  return total;
}

/// Brute-force JUR: every mu vector, the oracle CRO on the MBS set and best
/// bids for the rest. +inf when nothing is feasible.
inline double oracle_jur_cost(const Scenario& sc, const BidTable& bids) {
  const std::size_t n = sc.users.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::size_t> mbs;
    double cost = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool on_mbs = (mask >> i) & 1U;
      const User& u = sc.users[i];
      if (on_mbs) {
        ok = sc.delay.d_c < u.d_th;
        mbs.push_back(i);
      } else {
        const Bid* b = bids.best_bid(i);
        ok = b && sc.delay.d_c + 3.0 * sc.delay.rtt < u.d_th;
        if (ok) cost += b->total;
      }
    }
    if (!ok) continue;
    if (!(min_bandwidth_sum(sc, mbs) < sc.mbs.w_max)) continue;
    cost += oracle_cro(sc, mbs).cost;
    best = std::min(best, cost);
  }
  return best;
}

inline std::vector<std::size_t> all_users(const Scenario& sc) {
  std::vector<std::size_t> v(sc.users.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

/// Uncoupled MBS bandwidth demand of the given users.
inline double uncoupled_demand(const Scenario& sc, const std::vector<std::size_t>& users) {
  double total = 0.0;
  for (std::size_t i : users) {
    const User& u = sc.users[i];
    const double g = u.gain_to(sc.mbs.id);
    total += oracle_link(u.r_th * (1.0 - u.delta_r), g * g / u.mean_noise, sc.mbs.p_max,
                         sc.mbs.c_p, sc.mbs.gamma * sc.mbs.c_w, 0.0)
                 .w;
  }
  return total;
}

/// W_max between the full-power need (frac = 0, infeasible) and the uncoupled
/// demand (frac = 1, price zero).
inline double coupled_bandwidth(const Scenario& sc, const std::vector<std::size_t>& users,
                                double frac) {
  const double need = min_bandwidth_sum(sc, users);
  return need + frac * (uncoupled_demand(sc, users) - need);
}

}  // namespace hetnet::testing

#pragma once

#include <cmath>

#include "hetnet/errors.hpp"

namespace hetnet::detail {

/// Smallest-ish price nu >= lo with demand(nu) <= w_max and
/// w_max - demand(nu) <= 1e-10 w_max. demand must be non-increasing and
/// demand(lo) > w_max. Doubles `hi` until feasible, then Illinois false
/// position with a bisection step every third iteration. Returns the feasible
/// side of the bracket.
template <class Demand>
double find_bandwidth_price(Demand&& demand, double w_max, double lo, double hi) {
  if (!(hi > lo)) hi = lo > 0.0 ? 2.0 * lo : 1.0;
  double f_hi = demand(hi) - w_max;
  int doublings = 0;
  while (f_hi > 0.0) {
    lo = hi;
    hi *= 2.0;
    f_hi = demand(hi) - w_max;
    if (++doublings > 2000) throw InfeasibleError("bandwidth price diverged", {});
  }
  double f_lo = demand(lo) - w_max;
  if (!(f_lo > 0.0)) return lo;
  double gap = -f_hi;  // unweighted slack at hi
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    if (gap <= 1e-10 * w_max) break;
    double x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
    if (it % 3 == 2 || !(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = demand(x) - w_max;
    if (fx > 0.0) {
      lo = x;
      f_lo = fx;
      if (side == 1) f_hi *= 0.5;
      side = 1;
    } else {
      hi = x;
      f_hi = fx;
      gap = -fx;
      if (side == -1) f_lo *= 0.5;
      side = -1;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return hi;
}

}  // namespace hetnet::detail

#include "hetnet/link.hpp"

#include <algorithm>
#include <limits>

namespace hetnet {

namespace {
constexpr double kGoldenRelTol = 1e-10;
constexpr int kGoldenMaxIters = 500;
// Relative margin on w so that rounding never leaves the rate a hair short.
constexpr double kRateMargin = 1e-13;
}  // namespace

double link_cost_at(const LinkCostModel& m, double s) {
  if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
  const double p = std::expm1(s * std::numbers::ln2) / m.snr_per_watt;
  return m.c_p * p + (m.bandwidth_cost + m.bandwidth_price) * m.rate / s;
}

LinkAllocation link_allocation_at(const LinkCostModel& m, double s) {
  LinkAllocation a;
  if (m.rate <= 0.0) return a;
  a.p = std::min(std::expm1(s * std::numbers::ln2) / m.snr_per_watt, m.p_max);
  a.s = std::log1p(a.p * m.snr_per_watt) / std::numbers::ln2;
  a.w = m.rate / a.s * (1.0 + kRateMargin);
  a.cost = m.c_p * a.p + m.bandwidth_cost * a.w;
  a.priced_cost = a.cost + m.bandwidth_price * a.w;
  return a;
}

LinkAllocation minimize_link_cost(const LinkCostModel& m) {
  if (m.rate <= 0.0) return {};
  const double hi = m.s_max();
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0;
  double b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = link_cost_at(m, x1);
  double f2 = link_cost_at(m, x2);
  for (int it = 0; it < kGoldenMaxIters && (b - a) > kGoldenRelTol * b; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = link_cost_at(m, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = link_cost_at(m, x2);
    }
  }
  double s = f1 <= f2 ? x1 : x2;
  if (link_cost_at(m, hi) <= std::min(f1, f2)) s = hi;
  return link_allocation_at(m, s);
}

}  // namespace hetnet

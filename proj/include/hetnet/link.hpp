#pragma once

#include <cmath>
#include <numbers>

namespace hetnet {

/// Single-link resource problem: serve `rate` bit/s over a link with
/// snr_per_watt = h^2 / N0 at minimum c_p p + (bandwidth_cost + bandwidth_price) w,
/// 0 <= p <= p_max.
///
/// With spectral efficiency s = log2(1 + p * snr_per_watt) on the active rate
/// curve, p = (2^s - 1) / snr_per_watt and w = rate / s, so the objective
/// becomes the convex scalar function
///   c_p (2^s - 1) / snr_per_watt + (bandwidth_cost + bandwidth_price) rate / s
/// on (0, s_max].
struct LinkCostModel {
  double rate = 0.0;
  double snr_per_watt = 0.0;
  double p_max = 0.0;
  double c_p = 0.0;
  double bandwidth_cost = 0.0;   // gamma * c_w
  double bandwidth_price = 0.0;  // shadow price of shared bandwidth

  double s_max() const { return std::log1p(p_max * snr_per_watt) / std::numbers::ln2; }
  bool feasible() const { return rate <= 0.0 || p_max * snr_per_watt > 0.0; }
  /// Smallest bandwidth that still meets the rate (power at p_max).
  double min_bandwidth() const { return rate <= 0.0 ? 0.0 : rate / s_max(); }
};

struct LinkAllocation {
  double s = 0.0;
  double p = 0.0;
  double w = 0.0;
  double cost = 0.0;         // c_p p + bandwidth_cost w
  double priced_cost = 0.0;  // cost + bandwidth_price w
};

/// Objective as a function of spectral efficiency (including the price term).
double link_cost_at(const LinkCostModel& model, double s);

/// (p, w) on the rate curve at spectral efficiency s. w is nudged up so the
/// achieved rate is never below the requirement after rounding.
LinkAllocation link_allocation_at(const LinkCostModel& model, double s);

/// Golden-section minimisation over s, relative tolerance 1e-10.
/// Precondition: model.feasible().
LinkAllocation minimize_link_cost(const LinkCostModel& model);

}  // namespace hetnet

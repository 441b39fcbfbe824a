#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet {

using Position = Eigen::Vector2d;
using StationId = int;
using UserId = int;

inline constexpr StationId kMbsId = 0;

enum class StationKind { MBS, SBS };

struct StationParams {
  StationId id = kMbsId;
  StationKind kind = StationKind::MBS;
  Position position = Position::Zero();
  double coverage_radius = 0.0;  // ft
  double p_max = 0.0;            // W per user
  double w_max = 0.0;            // Hz, total
  double c_p = 0.0;              // cost per W
  double c_w = 0.0;              // cost per Hz
  double gamma = 1.0;            // power/bandwidth trade-off weight
  double reward_markup = 0.0;    // SBS only

  bool covers(const Position& p) const {
    return (p - position).squaredNorm() <= coverage_radius * coverage_radius;
  }
  /// gamma * c_w, the effective price of one Hz.
  double bandwidth_cost() const { return gamma * c_w; }
};

struct User {
  UserId id = 0;
  Position position = Position::Zero();
  double r_th = 0.0;     // bit/s
  double d_th = 0.0;     // s
  double delta_r = 0.0;  // reliability violation bound
  double delta_d = 0.0;  // delay violation bound
  std::map<StationId, double> mean_gain;  // amplitude gain per covering station
  double mean_noise = 0.0;                // W/Hz

  /// Mean amplitude gain to a station, or 0 when the station does not cover
  /// the user.
  double gain_to(StationId station) const {
    auto it = mean_gain.find(station);
    return it == mean_gain.end() ? 0.0 : it->second;
  }
};

struct DelayParams {
  double d_c = 1e-3;  // MBS computation delay, s
  double rtt = 1e-4;  // MBS <-> SBS round trip, s
};

struct Scenario {
  StationParams mbs;
  std::vector<StationParams> sbss;
  std::vector<User> users;
  DelayParams delay;
  std::uint64_t seed = 0;

  const StationParams& station(StationId id) const;
};

/// Log-distance path loss. Amplitude gain is sqrt(G0 * (d/d_ref)^-alpha),
/// with the distance clamped below at d_ref.
struct ChannelModel {
  double g0 = 1.0;
  double d_ref = 10.0;  // ft
  double alpha = 3.5;
};

template <typename Scalar>
Scalar channel_gain(Scalar distance, const ChannelModel& model) {
  using std::max;
  using std::pow;
  using std::sqrt;
  const Scalar d_ref(model.d_ref);
  const Scalar ratio = max(distance, d_ref) / d_ref;
  return sqrt(Scalar(model.g0) * pow(ratio, Scalar(-model.alpha)));
}

/// Expected Shannon rate w * log2(1 + p h^2 / N0) in bit/s.
template <typename Scalar>
Scalar expected_rate(Scalar p, Scalar w, Scalar h_bar, Scalar n0_bar) {
  using std::log1p;
  return w * log1p(p * h_bar * h_bar / n0_bar) / Scalar(std::numbers::ln2);
}

/// Access delay: d_c for MBS-served users, d_c + 3 RTT when offloaded
/// (bid, bid selection, acknowledgement).
inline double delay_of(const User& /*user*/, bool served_by_mbs,
                       const DelayParams& delay) {
  return served_by_mbs ? delay.d_c : delay.d_c + 3.0 * delay.rtt;
}

/// Deterministic delay makes Pr[d >= d_th] either 0 or 1, so the delay
/// constraint holds iff d < d_th strictly.
inline bool delay_feasible(const User& user, bool served_by_mbs,
                           const DelayParams& delay) {
  return delay_of(user, served_by_mbs, delay) < user.d_th;
}

/// Six association features in fixed order:
/// distance to MBS, d_th, r_th, delta_d, delta_r, SNR at MBS.
using FeatureVector = Eigen::Matrix<double, 6, 1>;

enum FeatureIndex : int {
  kFeatDistance = 0,
  kFeatDelayThreshold = 1,
  kFeatRateThreshold = 2,
  kFeatDelayViolation = 3,
  kFeatRateViolation = 4,
  kFeatSnr = 5,
};

FeatureVector features_of(const User& user, const Scenario& scenario,
                          double reference_power);
/// Uses the MBS p_max as reference power.
FeatureVector features_of(const User& user, const Scenario& scenario);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Per-kind station parameters used when generating a scenario.
struct StationTemplate {
  double coverage_radius = 0.0;
  double p_max = 0.0;
  double w_max = 0.0;
  double c_p = 0.0;
  double c_w = 0.0;
  double gamma = 1.0;
  double reward_markup = 0.0;
};

struct ScenarioConfig {
  std::size_t n_users = 300;
  std::size_t n_sbs = 8;
  StationTemplate mbs{2000.0, 100.0, 7.0e7, 1.0, 1e-5, 1.0, 0.0};
  StationTemplate sbs{600.0, 100.0, 1.0e8, 1.0, 1e-5, 1.0, 0.1};
  /// SBS ring radius as a fraction of the MBS radius (ignored when explicit
  /// positions are given).
  double sbs_ring_fraction = 0.7;
  std::vector<Position> sbs_positions;
  ChannelModel channel;
  double noise_psd = 1e-9;
  DelayParams delay;
  Range r_th{1e6, 10e6};
  Range d_th{2e-3, 20e-3};
  Range delta_r{0.01, 0.1};
  Range delta_d{0.01, 0.1};

  /// Throws ConfigError when the configuration is unusable.
  void validate() const;
};

/// Default scale: one MBS (r = 2000 ft), 8 SBSs (r = 600 ft), 300 users.
ScenarioConfig default_scenario_config();

/// Users uniform in the MBS disk, constraints uniform in their ranges.
/// A pure function of (config, seed).
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Checks the structural invariants of a scenario; throws ConfigError.
void validate_scenario(const Scenario& scenario);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(std::string_view text);

}  // namespace hetnet

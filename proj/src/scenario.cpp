#include "hetnet/scenario.hpp"

#include <set>

#include "hetnet/errors.hpp"
#include "hetnet/random.hpp"
#include "json_util.hpp"

namespace hetnet {

using detail::json;

const StationParams& Scenario::station(StationId id) const {
  if (id == mbs.id) return mbs;
  for (const auto& s : sbss) {
    if (s.id == id) return s;
  }
  throw ConfigError("unknown station id " + std::to_string(id));
}

FeatureVector features_of(const User& user, const Scenario& scenario,
                          double reference_power) {
  const double h = user.gain_to(scenario.mbs.id);
  FeatureVector u;
  u[kFeatDistance] = (user.position - scenario.mbs.position).norm();
  u[kFeatDelayThreshold] = user.d_th;
  u[kFeatRateThreshold] = user.r_th;
  u[kFeatDelayViolation] = user.delta_d;
  u[kFeatRateViolation] = user.delta_r;
  u[kFeatSnr] = reference_power * h * h / user.mean_noise;
  return u;
}

FeatureVector features_of(const User& user, const Scenario& scenario) {
  return features_of(user, scenario, scenario.mbs.p_max);
}

namespace {

void check_range(const Range& r, const char* name, double lo, double hi,
                 bool hi_open) {
  const bool ok = r.lo <= r.hi && r.lo >= lo && (hi_open ? r.hi < hi : r.hi <= hi);
  if (!ok || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ConfigError(std::string("invalid range for ") + name);
  }
}

void check_template(const StationTemplate& t, const char* name) {
  const std::string n(name);
  if (!(t.coverage_radius > 0)) throw ConfigError(n + ".coverage_radius must be > 0");
  if (!(t.p_max > 0)) throw ConfigError(n + ".p_max must be > 0");
  if (!(t.w_max >= 0)) throw ConfigError(n + ".w_max must be >= 0");
  if (!(t.c_p >= 0)) throw ConfigError(n + ".c_p must be >= 0");
  if (!(t.c_w >= 0)) throw ConfigError(n + ".c_w must be >= 0");
  if (!(t.gamma > 0)) throw ConfigError(n + ".gamma must be > 0");
  if (!(t.reward_markup >= 0)) throw ConfigError(n + ".reward_markup must be >= 0");
}

StationParams make_station(StationId id, StationKind kind, const Position& pos,
                           const StationTemplate& t) {
  StationParams s;
  s.id = id;
  s.kind = kind;
  s.position = pos;
  s.coverage_radius = t.coverage_radius;
  s.p_max = t.p_max;
  s.w_max = t.w_max;
  s.c_p = t.c_p;
  s.c_w = t.c_w;
  s.gamma = t.gamma;
  s.reward_markup = kind == StationKind::SBS ? t.reward_markup : 0.0;
  return s;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_users == 0) throw ConfigError("n_users must be > 0");
  check_template(mbs, "mbs");
  check_template(sbs, "sbs");
  if (n_sbs > 0 && sbs.coverage_radius > mbs.coverage_radius) {
    throw ConfigError("SBS coverage radius exceeds the MBS radius");
  }
  if (!sbs_positions.empty() && sbs_positions.size() != n_sbs) {
    throw ConfigError("sbs_positions must list exactly n_sbs positions");
  }
  if (!(sbs_ring_fraction >= 0 && sbs_ring_fraction <= 1)) {
    throw ConfigError("sbs_ring_fraction must be in [0, 1]");
  }
  if (!(channel.g0 > 0) || !(channel.d_ref > 0) || !(channel.alpha >= 0)) {
    throw ConfigError("invalid channel model");
  }
  if (!(noise_psd > 0)) throw ConfigError("noise_psd must be > 0");
  if (!(delay.d_c >= 0) || !(delay.rtt >= 0)) throw ConfigError("delays must be >= 0");
  check_range(r_th, "r_th", 0.0, HUGE_VAL, false);
  if (!(r_th.lo > 0)) throw ConfigError("r_th must be > 0");
  check_range(d_th, "d_th", 0.0, HUGE_VAL, false);
  if (!(d_th.lo > 0)) throw ConfigError("d_th must be > 0");
  check_range(delta_r, "delta_r", 0.0, 1.0, true);
  check_range(delta_d, "delta_d", 0.0, 1.0, true);
}

ScenarioConfig default_scenario_config() { return ScenarioConfig{}; }

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario sc;
  sc.seed = seed;
  sc.delay = config.delay;
  sc.mbs = make_station(kMbsId, StationKind::MBS, Position::Zero(), config.mbs);

  const double ring = config.sbs_ring_fraction * config.mbs.coverage_radius;
  for (std::size_t k = 0; k < config.n_sbs; ++k) {
    Position pos;
    if (!config.sbs_positions.empty()) {
      pos = config.sbs_positions[k];
    } else {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(config.n_sbs);
      pos = Position(ring * std::cos(angle), ring * std::sin(angle));
    }
    sc.sbss.push_back(make_station(static_cast<StationId>(k + 1), StationKind::SBS,
                                   pos, config.sbs));
  }

  Rng rng(seed);
  const double radius = config.mbs.coverage_radius;
  sc.users.reserve(config.n_users);
  for (std::size_t i = 0; i < config.n_users; ++i) {
    User u;
    u.id = static_cast<UserId>(i);
    // Draw order is part of the determinism contract.
    const double r = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    u.position = Position(r * std::cos(theta), r * std::sin(theta));
    u.r_th = rng.uniform(config.r_th.lo, config.r_th.hi);
    u.d_th = rng.uniform(config.d_th.lo, config.d_th.hi);
    u.delta_r = rng.uniform(config.delta_r.lo, config.delta_r.hi);
    u.delta_d = rng.uniform(config.delta_d.lo, config.delta_d.hi);
    u.mean_noise = config.noise_psd;
    u.mean_gain[sc.mbs.id] =
        channel_gain((u.position - sc.mbs.position).norm(), config.channel);
    for (const auto& s : sc.sbss) {
      if (s.covers(u.position)) {
        u.mean_gain[s.id] = channel_gain((u.position - s.position).norm(), config.channel);
      }
    }
    sc.users.push_back(std::move(u));
  }
  return sc;
}

void validate_scenario(const Scenario& sc) {
  if (sc.mbs.kind != StationKind::MBS) throw ConfigError("mbs must have kind MBS");
  std::set<StationId> ids{sc.mbs.id};
  for (const auto& s : sc.sbss) {
    if (s.kind != StationKind::SBS) throw ConfigError("sbss entries must have kind SBS");
    if (!ids.insert(s.id).second) throw ConfigError("duplicate station id");
  }
  if (!(sc.mbs.p_max > 0) || !(sc.mbs.coverage_radius > 0) || !(sc.mbs.gamma > 0)) {
    throw ConfigError("invalid MBS parameters");
  }
  std::set<UserId> uids;
  for (const auto& u : sc.users) {
    if (!uids.insert(u.id).second) throw ConfigError("duplicate user id");
    if (!(u.r_th > 0) || !(u.d_th > 0) || !(u.delta_r >= 0 && u.delta_r < 1) ||
        !(u.delta_d >= 0 && u.delta_d < 1) || !(u.mean_noise > 0)) {
      throw ConfigError("invalid constraints for user " + std::to_string(u.id));
    }
    if (!sc.mbs.covers(u.position)) {
      throw ConfigError("user " + std::to_string(u.id) + " outside MBS coverage");
    }
  }
}

// --- JSON -----------------------------------------------------------------

namespace {

json position_json(const Position& p) { return json::array({p.x(), p.y()}); }

Position position_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("field '" + path + "': expected [x, y]");
  return Position(j[0].get<double>(), j[1].get<double>());
}

json station_json(const StationParams& s) {
  return json{{"id", s.id},
              {"kind", s.kind == StationKind::MBS ? "MBS" : "SBS"},
              {"position", position_json(s.position)},
              {"coverage_radius", s.coverage_radius},
              {"p_max", s.p_max},
              {"w_max", s.w_max},
              {"c_p", s.c_p},
              {"c_w", s.c_w},
              {"gamma", s.gamma},
              {"reward_markup", s.reward_markup}};
}

StationParams station_from(const json& j, const std::string& path) {
  using detail::field;
  StationParams s;
  s.id = field<int>(j, "id", path);
  const auto kind = field<std::string>(j, "kind", path);
  if (kind != "MBS" && kind != "SBS") throw ConfigError("field '" + path + ".kind': expected MBS or SBS");
  s.kind = kind == "MBS" ? StationKind::MBS : StationKind::SBS;
  s.position = position_from(j.at("position"), path + ".position");
  s.coverage_radius = field<double>(j, "coverage_radius", path);
  s.p_max = field<double>(j, "p_max", path);
  s.w_max = field<double>(j, "w_max", path);
  s.c_p = field<double>(j, "c_p", path);
  s.c_w = field<double>(j, "c_w", path);
  s.gamma = field<double>(j, "gamma", path);
  s.reward_markup = field<double>(j, "reward_markup", path);
  return s;
}

json user_json(const User& u) {
  json gains = json::object();
  for (const auto& [id, g] : u.mean_gain) gains[std::to_string(id)] = g;
  return json{{"id", u.id},
              {"position", position_json(u.position)},
              {"r_th", u.r_th},
              {"d_th", u.d_th},
              {"delta_r", u.delta_r},
              {"delta_d", u.delta_d},
              {"mean_gain", gains},
              {"mean_noise", u.mean_noise}};
}

User user_from(const json& j, const std::string& path) {
  using detail::field;
  User u;
  u.id = field<int>(j, "id", path);
  u.position = position_from(j.at("position"), path + ".position");
  u.r_th = field<double>(j, "r_th", path);
  u.d_th = field<double>(j, "d_th", path);
  u.delta_r = field<double>(j, "delta_r", path);
  u.delta_d = field<double>(j, "delta_d", path);
  u.mean_noise = field<double>(j, "mean_noise", path);
  const auto& gains = j.at("mean_gain");
  if (!gains.is_object()) throw ConfigError("field '" + path + ".mean_gain': expected object");
  for (const auto& [key, value] : gains.items()) {
    u.mean_gain[std::stoi(key)] = value.get<double>();
  }
  return u;
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["mbs"] = station_json(sc.mbs);
  j["sbss"] = json::array();
  for (const auto& s : sc.sbss) j["sbss"].push_back(station_json(s));
  j["users"] = json::array();
  for (const auto& u : sc.users) j["users"].push_back(user_json(u));
  j["delay"] = json{{"d_c", sc.delay.d_c}, {"rtt", sc.delay.rtt}};
  j["seed"] = sc.seed;
  return j.dump(1);
}

Scenario scenario_from_json(std::string_view text) {
  using detail::field;
  const json j = detail::parse_json(text, "scenario JSON");
  Scenario sc;
  try {
    sc.mbs = station_from(j.at("mbs"), "mbs");
    const auto& sbss = j.at("sbss");
    for (std::size_t k = 0; k < sbss.size(); ++k) {
      sc.sbss.push_back(station_from(sbss[k], "sbss[" + std::to_string(k) + "]"));
    }
    const auto& users = j.at("users");
    for (std::size_t i = 0; i < users.size(); ++i) {
      sc.users.push_back(user_from(users[i], "users[" + std::to_string(i) + "]"));
    }
    sc.delay.d_c = field<double>(j.at("delay"), "d_c", "delay");
    sc.delay.rtt = field<double>(j.at("delay"), "rtt", "delay");
    sc.seed = field<std::uint64_t>(j, "seed", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  validate_scenario(sc);
  return sc;
}

}  // namespace hetnet

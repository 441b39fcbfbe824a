#include "hetnet/config.hpp"

#include <algorithm>
#include <initializer_list>

#include "hetnet/errors.hpp"
#include "json_util.hpp"

namespace hetnet {

using detail::json;

namespace {

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  if (!obj.is_object()) {
    throw ConfigError("field '" + (path.empty() ? std::string("<root>") : path) +
                      "': expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown field '" + join(path, key.c_str()) + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, const std::string& path, T& target) {
  target = detail::field_or<T>(obj, key, path, target);
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

void read_range(const json& obj, const char* key, const std::string& path, Range& r) {
  if (!obj.contains(key)) return;
  const auto v = detail::field<std::vector<double>>(obj, key, path);
  if (v.size() != 2) throw ConfigError("field '" + join(path, key) + "': expected [lo, hi]");
  r = {v[0], v[1]};
}

json station_json(const StationTemplate& t) {
  return json{{"coverage_radius", t.coverage_radius}, {"p_max", t.p_max}, {"w_max", t.w_max},
              {"c_p", t.c_p},       {"c_w", t.c_w},     {"gamma", t.gamma},
              {"reward_markup", t.reward_markup}};
}

void read_station(const json& obj, const char* key, const std::string& path,
                  StationTemplate& t) {
  if (!obj.contains(key)) return;
  const json& j = obj.at(key);
  const std::string p = join(path, key);
  check_keys(j, {"coverage_radius", "p_max", "w_max", "c_p", "c_w", "gamma", "reward_markup"}, p);
  read(j, "coverage_radius", p, t.coverage_radius);
  read(j, "p_max", p, t.p_max);
  read(j, "w_max", p, t.w_max);
  read(j, "c_p", p, t.c_p);
  read(j, "c_w", p, t.c_w);
  read(j, "gamma", p, t.gamma);
  read(j, "reward_markup", p, t.reward_markup);
}

json scenario_json(const ScenarioConfig& c) {
  json positions = json::array();
  for (const auto& p : c.sbs_positions) positions.push_back(json::array({p.x(), p.y()}));
  return json{{"n_users", c.n_users},
              {"n_sbs", c.n_sbs},
              {"mbs", station_json(c.mbs)},
              {"sbs", station_json(c.sbs)},
              {"sbs_ring_fraction", c.sbs_ring_fraction},
              {"sbs_positions", positions},
              {"channel", {{"g0", c.channel.g0}, {"d_ref", c.channel.d_ref}, {"alpha", c.channel.alpha}}},
              {"noise_psd", c.noise_psd},
              {"delay", {{"d_c", c.delay.d_c}, {"rtt", c.delay.rtt}}},
              {"r_th", range_json(c.r_th)},
              {"d_th", range_json(c.d_th)},
              {"delta_r", range_json(c.delta_r)},
              {"delta_d", range_json(c.delta_d)}};
}

void read_scenario(const json& j, const std::string& p, ScenarioConfig& c) {
  check_keys(j, {"n_users", "n_sbs", "mbs", "sbs", "sbs_ring_fraction", "sbs_positions",
                 "channel", "noise_psd", "delay", "r_th", "d_th", "delta_r", "delta_d"},
             p);
  read(j, "n_users", p, c.n_users);
  read(j, "n_sbs", p, c.n_sbs);
  read_station(j, "mbs", p, c.mbs);
  read_station(j, "sbs", p, c.sbs);
  read(j, "sbs_ring_fraction", p, c.sbs_ring_fraction);
  if (j.contains("sbs_positions")) {
    const auto v = detail::field<std::vector<std::vector<double>>>(j, "sbs_positions", p);
    c.sbs_positions.clear();
    for (const auto& xy : v) {
      if (xy.size() != 2) throw ConfigError("field '" + p + ".sbs_positions': expected [x, y]");
      c.sbs_positions.emplace_back(xy[0], xy[1]);
    }
  }
  if (j.contains("channel")) {
    const json& ch = j.at("channel");
    const std::string cp = join(p, "channel");
    check_keys(ch, {"g0", "d_ref", "alpha"}, cp);
    read(ch, "g0", cp, c.channel.g0);
    read(ch, "d_ref", cp, c.channel.d_ref);
    read(ch, "alpha", cp, c.channel.alpha);
  }
  read(j, "noise_psd", p, c.noise_psd);
  if (j.contains("delay")) {
    const json& d = j.at("delay");
    const std::string dp = join(p, "delay");
    check_keys(d, {"d_c", "rtt"}, dp);
    read(d, "d_c", dp, c.delay.d_c);
    read(d, "rtt", dp, c.delay.rtt);
  }
  read_range(j, "r_th", p, c.r_th);
  read_range(j, "d_th", p, c.d_th);
  read_range(j, "delta_r", p, c.delta_r);
  read_range(j, "delta_d", p, c.delta_d);
}

}  // namespace

std::vector<std::pair<double, double>> RunConfig::cv_grid() const {
  std::vector<std::pair<double, double>> grid;
  for (double c : cv_c) {
    for (double g : cv_gamma) grid.emplace_back(c, g);
  }
  return grid;
}

void RunConfig::validate() const {
  scenario.validate();
  if (jur.node_budget <= 0) throw ConfigError("jur.node_budget must be > 0");
  if (!(cro.tol > 0) || cro.max_iters <= 0 || !(cro.match_tol > 0)) {
    throw ConfigError("cro tolerances must be positive");
  }
  if (!(cro.shrink > 0 && cro.shrink < 1)) throw ConfigError("cro.shrink must be in (0, 1)");
  if (!(cro.start_inflation > 1)) throw ConfigError("cro.start_inflation must be > 1");
  if (!(svm.c > 0) || !(svm.kernel_gamma > 0) || !(svm.tol > 0) || svm.max_passes <= 0) {
    throw ConfigError("svm hyperparameters must be positive");
  }
  if (cv_folds == 1 || cv_folds < 0) throw ConfigError("svm.cv_folds must be 0 or >= 2");
  if (cv_folds >= 2 && (cv_c.empty() || cv_gamma.empty())) {
    throw ConfigError("svm.cv_grid must not be empty");
  }
  for (double v : cv_c) {
    if (!(v > 0)) throw ConfigError("svm.cv_grid.c entries must be > 0");
  }
  for (double v : cv_gamma) {
    if (!(v > 0)) throw ConfigError("svm.cv_grid.kernel_gamma entries must be > 0");
  }
  if (training.n_scenarios == 0 || training.n_users == 0) {
    throw ConfigError("training needs at least one scenario and one user");
  }
  if (sweep.n_grid.empty()) throw ConfigError("sweep.n_grid must not be empty");
  for (std::size_t k = 0; k < sweep.n_grid.size(); ++k) {
    if (sweep.n_grid[k] == 0) throw ConfigError("sweep.n_grid entries must be > 0");
    if (k > 0 && sweep.n_grid[k] <= sweep.n_grid[k - 1]) {
      throw ConfigError("sweep.n_grid must be strictly ascending");
    }
  }
  if (sweep.mbs_w_max && !(*sweep.mbs_w_max >= 0)) {
    throw ConfigError("sweep.mbs_w_max must be >= 0");
  }
}

RunConfig run_config_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "config");
  RunConfig c;
  check_keys(j, {"seed", "out_dir", "scenario", "jur", "cro", "svm", "training", "sweep"}, "");
  read(j, "seed", "", c.seed);
  read(j, "out_dir", "", c.out_dir);
  if (j.contains("scenario")) read_scenario(j.at("scenario"), "scenario", c.scenario);
  if (j.contains("jur")) {
    check_keys(j.at("jur"), {"node_budget"}, "jur");
    read(j.at("jur"), "node_budget", "jur", c.jur.node_budget);
  }
  if (j.contains("cro")) {
    const json& cj = j.at("cro");
    check_keys(cj, {"tol", "max_iters", "match_tol", "shrink", "start_inflation"}, "cro");
    read(cj, "tol", "cro", c.cro.tol);
    read(cj, "max_iters", "cro", c.cro.max_iters);
    read(cj, "match_tol", "cro", c.cro.match_tol);
    read(cj, "shrink", "cro", c.cro.shrink);
    read(cj, "start_inflation", "cro", c.cro.start_inflation);
  }
  if (j.contains("svm")) {
    const json& sj = j.at("svm");
    check_keys(sj, {"c", "kernel_gamma", "tol", "max_passes", "cv_folds", "cv_grid"}, "svm");
    read(sj, "c", "svm", c.svm.c);
    read(sj, "kernel_gamma", "svm", c.svm.kernel_gamma);
    read(sj, "tol", "svm", c.svm.tol);
    read(sj, "max_passes", "svm", c.svm.max_passes);
    read(sj, "cv_folds", "svm", c.cv_folds);
    if (sj.contains("cv_grid")) {
      const json& g = sj.at("cv_grid");
      check_keys(g, {"c", "kernel_gamma"}, "svm.cv_grid");
      read(g, "c", "svm.cv_grid", c.cv_c);
      read(g, "kernel_gamma", "svm.cv_grid", c.cv_gamma);
    }
  }
  if (j.contains("training")) {
    check_keys(j.at("training"), {"n_scenarios", "n_users"}, "training");
    read(j.at("training"), "n_scenarios", "training", c.training.n_scenarios);
    read(j.at("training"), "n_users", "training", c.training.n_users);
  }
  if (j.contains("sweep")) {
    const json& w = j.at("sweep");
    check_keys(w, {"n_grid", "mbs_w_max"}, "sweep");
    read(w, "n_grid", "sweep", c.sweep.n_grid);
    if (w.contains("mbs_w_max")) {
      if (w.at("mbs_w_max").is_null()) {
        c.sweep.mbs_w_max.reset();
      } else {
        c.sweep.mbs_w_max = detail::field<double>(w, "mbs_w_max", "sweep");
      }
    }
  }
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["scenario"] = scenario_json(c.scenario);
  j["jur"] = {{"node_budget", c.jur.node_budget}};
  j["cro"] = {{"tol", c.cro.tol},
              {"max_iters", c.cro.max_iters},
              {"match_tol", c.cro.match_tol},
              {"shrink", c.cro.shrink},
              {"start_inflation", c.cro.start_inflation}};
  j["svm"] = {{"c", c.svm.c},
              {"kernel_gamma", c.svm.kernel_gamma},
              {"tol", c.svm.tol},
              {"max_passes", c.svm.max_passes},
              {"cv_folds", c.cv_folds},
              {"cv_grid", {{"c", c.cv_c}, {"kernel_gamma", c.cv_gamma}}}};
  j["training"] = {{"n_scenarios", c.training.n_scenarios}, {"n_users", c.training.n_users}};
  j["sweep"] = {{"n_grid", c.sweep.n_grid},
                {"mbs_w_max", c.sweep.mbs_w_max ? json(*c.sweep.mbs_w_max) : json(nullptr)}};
  return j.dump(2) + "\n";
}

}  // namespace hetnet

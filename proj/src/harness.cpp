#include "hetnet/harness.hpp"

#include <cstdio>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/io.hpp"
#include "hetnet/random.hpp"
#include "json_util.hpp"

namespace hetnet {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Metrics metrics_of(const std::string& algorithm, const Scenario& sc, const JurSolution& sol) {
  Metrics m;
  m.algorithm = algorithm;
  m.running_time = sol.wall_time;
  m.total_cost = sol.total_cost;
  m.served = sol.served_count();
  m.avg_cost_per_user = m.served > 0 ? sol.total_cost / static_cast<double>(m.served) : 0.0;
  m.service_rate = sol.service_rate();
  m.offloaded_count = sol.association.offloaded_count();
  m.scenario_seed = sc.seed;
  m.n_users = sc.users.size();
  return m;
}

Metrics failed_metrics(const std::string& algorithm, const Scenario& sc, const std::string& why) {
  Metrics m;
  m.algorithm = algorithm;
  m.scenario_seed = sc.seed;
  m.n_users = sc.users.size();
  m.failed = true;
  m.failure = why;
  return m;
}

void add_user_costs(Comparison& cmp, const std::string& algorithm, const Scenario& sc,
                    const JurSolution& sol) {
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    cmp.per_user.push_back({sc.users[i].id, algorithm, sol.user_cost[i]});
  }
}

}  // namespace

Comparison run_comparison(const Scenario& scenario, const SvmModel& model,
                          const ComparisonOpts& opts) {
  Comparison cmp;
  const BidTable bids = build_bid_table(scenario);
  cmp.scenario_hash = content_hash(scenario_to_json(scenario));
  cmp.bid_table_hash = content_hash(bid_table_csv(bids));

  try {
    cmp.dsm = solve_dsm(scenario);
    cmp.metrics.push_back(metrics_of("DSM", scenario, *cmp.dsm));
    add_user_costs(cmp, "DSM", scenario, *cmp.dsm);
  } catch (const std::runtime_error& e) {
    cmp.metrics.push_back(failed_metrics("DSM", scenario, e.what()));
  }
  try {
    cmp.jur = solve_jur_bnb(scenario, bids, opts.jur);
    cmp.metrics.push_back(metrics_of("JUR", scenario, *cmp.jur));
    add_user_costs(cmp, "JUR", scenario, *cmp.jur);
  } catch (const std::runtime_error& e) {
    cmp.metrics.push_back(failed_metrics("JUR", scenario, e.what()));
  }
  try {
    cmp.lhm = solve_lhm(scenario, model, bids, opts.lhm);
    if (cmp.jur) {
      cmp.lhm->svm_agreement =
          association_agreement(cmp.lhm->solution.association, cmp.jur->association);
    }
    cmp.metrics.push_back(metrics_of("LHM", scenario, cmp.lhm->solution));
    add_user_costs(cmp, "LHM", scenario, cmp.lhm->solution);
  } catch (const std::runtime_error& e) {
    cmp.metrics.push_back(failed_metrics("LHM", scenario, e.what()));
  }
  return cmp;
}

SweepResult sweep_load(const ScenarioConfig& base, const std::vector<std::size_t>& n_grid,
                       const SvmModel& model, std::uint64_t seed, const ComparisonOpts& opts) {
  if (n_grid.empty()) throw ConfigError("load grid must not be empty");
  for (std::size_t k = 1; k < n_grid.size(); ++k) {
    if (n_grid[k] <= n_grid[k - 1]) throw ConfigError("load grid must be strictly ascending");
  }
  SweepResult result;
  for (std::size_t n : n_grid) {
    ScenarioConfig cfg = base;
    cfg.n_users = n;
    const Scenario sc = generate_scenario(cfg, seed);
    const Comparison cmp = run_comparison(sc, model, opts);
    for (const Metrics& m : cmp.metrics) {
      result.rows.push_back({n, m.algorithm, m.failed ? 0.0 : m.service_rate,
                             m.avg_cost_per_user, m.failed});
    }
  }
  return result;
}

std::string table1_csv(const Comparison& cmp, bool mask_timing) {
  std::ostringstream out;
  out << "algorithm,running_time_s,avg_cost_per_user,service_rate,offloaded\n";
  for (const Metrics& m : cmp.metrics) {
    out << m.algorithm << ',';
    if (mask_timing) {
      out << "masked";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", m.running_time);
      out << buf;
    }
    if (m.failed) {
      out << ",infeasible,0,0\n";
    } else {
      out << ',' << num(m.avg_cost_per_user) << ',' << num(m.service_rate) << ','
          << m.offloaded_count << '\n';
    }
  }
  return out.str();
}

std::string fig2_csv(const Comparison& cmp) {
  std::ostringstream out;
  out << "user_id,algorithm,cost\n";
  for (const auto& r : cmp.per_user) out << r.user_id << ',' << r.algorithm << ',' << num(r.cost) << '\n';
  return out.str();
}

std::string fig3_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "n_users,algorithm,service_rate\n";
  for (const auto& r : sweep.rows) {
    out << r.n_users << ',' << r.algorithm << ',' << num(r.service_rate) << '\n';
  }
  return out.str();
}

OutputFile write_output(const std::filesystem::path& out_dir, const std::string& name,
                        const std::string& content) {
  write_file_atomic(out_dir / name, content);
  return {name, content_hash(content), content.size()};
}

std::vector<OutputFile> emit_plot_data(const Comparison* cmp, const SweepResult* sweep,
                                       const std::filesystem::path& out_dir,
                                       const ManifestInfo& info, bool mask_timing) {
  const bool have_cmp = cmp && !cmp->metrics.empty();
  const bool have_sweep = sweep && !sweep->rows.empty();
  if (!have_cmp && !have_sweep) throw ConfigError("no results to write");

  std::vector<OutputFile> files = info.extra_files;
  if (have_cmp) {
    files.push_back(write_output(out_dir, "table1.csv", table1_csv(*cmp, mask_timing)));
    files.push_back(write_output(out_dir, "fig2_cost.csv", fig2_csv(*cmp)));
  }
  if (have_sweep) files.push_back(write_output(out_dir, "fig3_service.csv", fig3_csv(*sweep)));

  detail::json m;
  m["master_seed"] = info.master_seed;
  m["seeds"] = detail::json::object();
  for (const auto& [name, s] : info.seeds) m["seeds"][name] = s;
  m["files"] = detail::json::array();
  for (const auto& f : files) {
    m["files"].push_back({{"name", f.name}, {"fnv1a64", f.hash}, {"bytes", f.bytes}});
  }
  const std::string scenario_hash =
      !info.scenario_hash.empty() ? info.scenario_hash : (have_cmp ? cmp->scenario_hash : "");
  const std::string bid_hash =
      !info.bid_table_hash.empty() ? info.bid_table_hash : (have_cmp ? cmp->bid_table_hash : "");
  m["inputs"] = {{"scenario", scenario_hash}, {"bid_table", bid_hash}, {"model", info.model_hash}};
  m["timing_masked"] = mask_timing;
  files.push_back(write_output(out_dir, "manifest.json", m.dump(2) + "\n"));
  return files;
}

std::vector<Scenario> training_scenarios(const RunConfig& config) {
  ScenarioConfig cfg = config.scenario;
  cfg.n_users = config.training.n_users;
  std::vector<Scenario> out;
  for (std::size_t k = 0; k < config.training.n_scenarios; ++k) {
    out.push_back(generate_scenario(cfg, substream_seed(config.seed, "train", k)));
  }
  return out;
}

SvmModel train_configured(const RunConfig& config, const TrainingSet& data,
                          std::optional<CvResult>* cv) {
  SvmParams params = config.svm;
  params.seed = substream_seed(config.seed, "svm-shuffle");
  if (config.cv_folds >= 2) {
    CvResult res = cross_validate(data, config.cv_grid(), config.cv_folds, params);
    params.c = res.best_c;
    params.kernel_gamma = res.best_kernel_gamma;
    if (cv) *cv = std::move(res);
  }
  return train(data, params);
}

PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir,
                            const PipelineOpts& opts) {
  config.validate();
  PipelineResult r;
  const std::uint64_t scenario_seed = substream_seed(config.seed, "scenario");
  r.scenario = generate_scenario(config.scenario, scenario_seed);

  std::vector<OutputFile> extra;
  extra.push_back(write_output(out_dir, "scenario.json", scenario_to_json(r.scenario)));
  if (opts.model) {
    r.model = *opts.model;
  } else {
    const TrainingSet data = build_training_data(training_scenarios(config), config.jur);
    r.training_rows = data.size();
    r.model = train_configured(config, data, &r.cv);
    r.training_accuracy = accuracy(r.model, data);
    extra.push_back(write_output(out_dir, "training.csv", training_set_csv(data)));
  }
  const std::string model_json = model_to_json(r.model);
  extra.push_back(write_output(out_dir, "model.json", model_json));

  ComparisonOpts copts;
  copts.jur = config.jur;
  copts.lhm.barrier = config.cro;
  r.comparison = run_comparison(r.scenario, r.model, copts);
  if (r.comparison.jur) {
    extra.push_back(
        write_output(out_dir, "solution_jur.csv", solution_csv(r.scenario, *r.comparison.jur)));
  }
  if (r.comparison.lhm) {
    extra.push_back(write_output(out_dir, "solution_lhm.csv",
                                 solution_csv(r.scenario, r.comparison.lhm->solution,
                                              &r.comparison.lhm->fallback_flags)));
  }

  const std::uint64_t sweep_seed = substream_seed(config.seed, "sweep");
  if (opts.run_sweep) {
    ScenarioConfig base = config.scenario;
    if (config.sweep.mbs_w_max) base.mbs.w_max = *config.sweep.mbs_w_max;
    r.sweep = sweep_load(base, config.sweep.n_grid, r.model, sweep_seed, copts);
  }

  ManifestInfo info;
  info.master_seed = config.seed;
  info.seeds = {{"scenario", scenario_seed},
                {"svm-shuffle", substream_seed(config.seed, "svm-shuffle")}};
  for (std::size_t k = 0; k < config.training.n_scenarios && !opts.model; ++k) {
    info.seeds.emplace_back("train[" + std::to_string(k) + "]",
                            substream_seed(config.seed, "train", k));
  }
  if (opts.run_sweep) info.seeds.emplace_back("sweep", sweep_seed);
  info.extra_files = std::move(extra);
  info.model_hash = content_hash(model_json);
  r.files = emit_plot_data(&r.comparison, r.sweep ? &*r.sweep : nullptr, out_dir, info,
                           opts.mask_timing);
  return r;
}

}  // namespace hetnet

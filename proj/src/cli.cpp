#include "hetnet/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "hetnet/config.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/harness.hpp"
#include "hetnet/io.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/lhm.hpp"
#include "hetnet/random.hpp"

namespace hetnet::cli {

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config_path;
  bool quiet = false;
  bool print_default_config = false;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    std::string text;
    try {
      text = read_file(g.config_path);
    } catch (const IoError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    try {
      cfg = run_config_from_json(text);
    } catch (const ConfigError& e) {
      throw ConfigError(g.config_path + ": " + e.what());
    }
  }
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  return cfg;
}

Scenario load_scenario(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return scenario_from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

SvmModel load_model(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  try {
    return model_from_json(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string blocking_list(const InfeasibleError& e) {
  std::ostringstream s;
  for (std::size_t k = 0; k < e.blocking_users().size(); ++k) {
    s << (k ? "," : "") << e.blocking_users()[k];
  }
  return s.str();
}

std::string metrics_row(const Metrics& m) {
  std::ostringstream s;
  s << "algorithm,running_time_s,avg_cost_per_user,service_rate,offloaded,total_cost,n_users\n";
  s << m.algorithm << ',' << fmt("%.3f", m.running_time) << ','
    << fmt("%.17g", m.avg_cost_per_user) << ',' << fmt("%.17g", m.service_rate) << ','
    << m.offloaded_count << ',' << fmt("%.17g", m.total_cost) << ',' << m.n_users << '\n';
  return s.str();
}

void print_table(std::ostream& out, const Comparison& cmp) {
  for (const Metrics& m : cmp.metrics) {
    if (m.failed) {
      out << m.algorithm << ": failed (" << m.failure << ")\n";
    } else {
      out << m.algorithm << ": avg cost " << fmt("%.6g", m.avg_cost_per_user) << ", service "
          << fmt("%.4f", m.service_rate) << ", offloaded " << m.offloaded_count << ", time "
          << fmt("%.3f", m.running_time) << " s\n";
    }
  }
}

bool any_succeeded(const std::vector<bool>& ok) {
  for (bool b : ok) {
    if (b) return true;
  }
  return false;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"URLLC HetNet offloading and resource allocation toolkit", "hetnet"};
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--config", g.config_path, "JSON run configuration");
  app.add_flag("--quiet", g.quiet, "Only print errors");
  app.add_flag("--print-default-config", g.print_default_config,
               "Print the default configuration as JSON and exit");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a scenario JSON");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one scenario with DSM, JUR or LHM");
  std::string scenario_path;
  std::string algorithm;
  std::string model_path;
  bool exact_only = false;
  solve->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  solve->add_option("--algorithm", algorithm, "dsm, jur or lhm")
      ->required()
      ->check(CLI::IsMember({"dsm", "jur", "lhm"}));
  solve->add_option("--model", model_path, "SVM model JSON (lhm)");
  solve->add_flag("--exact-only", exact_only, "JUR by exhaustive enumeration (N <= 20)");

  // train
  auto* tr = app.add_subcommand("train", "Train the association classifier");
  std::string data_path;
  std::vector<std::string> scenario_paths;
  std::size_t from_seeds = 0;
  int cv_folds = -1;
  std::optional<double> c_opt;
  std::optional<double> gamma_opt;
  std::string dump_data;
  auto* data_opt = tr->add_option("--data", data_path, "Labelled CSV (6 features, label)");
  auto* scen_opt =
      tr->add_option("--from-scenarios", scenario_paths, "Scenario JSONs to label with JUR");
  auto* seeds_opt = tr->add_option("--from-seeds", from_seeds,
                                   "Label this many generated training scenarios");
  data_opt->excludes(scen_opt)->excludes(seeds_opt);
  scen_opt->excludes(seeds_opt);
  tr->add_option("--cv", cv_folds, "Cross-validation folds (>= 2)");
  tr->add_option("--c", c_opt, "Regularisation parameter");
  tr->add_option("--gamma", gamma_opt, "Kernel width");
  tr->add_option("--dump-data", dump_data, "Also write the labelled rows as CSV");

  // compare
  auto* cmp = app.add_subcommand("compare", "Run DSM, JUR and LHM on one scenario");
  bool no_timing = false;
  std::string cmp_model;
  cmp->add_flag("--no-timing", no_timing, "Write 'masked' instead of running times");
  cmp->add_option("--model", cmp_model, "Use this model instead of training one");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Service rate versus load");
  std::vector<std::size_t> grid;
  std::string sw_model;
  bool sw_no_timing = false;
  sw->add_option("--grid", grid, "User counts, strictly ascending")->delimiter(',');
  sw->add_option("--model", sw_model, "Use this model instead of training one");
  sw->add_flag("--no-timing", sw_no_timing, "Write 'masked' instead of running times");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  auto info = [&](const std::string& line) {
    if (!g.quiet) out << line << '\n';
  };

  try {
    if (g.print_default_config) {
      out << run_config_to_json(RunConfig{});
      return kOk;
    }
    if (app.get_subcommands().empty()) {
      err << "error: a subcommand is required\n" << app.help();
      return kUsageError;
    }
    RunConfig cfg = load_config(g);

    if (*gen) {
      if (g.out.empty()) throw ConfigError("generate needs --out");
      const std::uint64_t seed = g.seed.value_or(cfg.seed);
      const Scenario sc = generate_scenario(cfg.scenario, seed);
      write_file_atomic(g.out, scenario_to_json(sc));
      info("generated " + std::to_string(sc.users.size()) + " users, " +
           std::to_string(sc.sbss.size()) + " SBSs, seed " + std::to_string(seed) + " -> " +
           g.out);
      return kOk;
    }

    if (*solve) {
      if (algorithm == "lhm" && model_path.empty()) throw ConfigError("lhm needs --model");
      const Scenario sc = load_scenario(scenario_path);
      const BidTable bids = build_bid_table(sc);
      JurSolution sol;
      std::vector<int> fallbacks;
      if (algorithm == "dsm") {
        sol = solve_dsm(sc);
      } else if (algorithm == "jur") {
        if (exact_only && sc.users.size() > 20) {
          throw ConfigError("--exact-only supports at most 20 users, scenario has " +
                            std::to_string(sc.users.size()));
        }
        sol = exact_only ? solve_jur_exhaustive(sc, bids) : solve_jur_bnb(sc, bids, cfg.jur);
      } else {
        LhmOpts lo;
        lo.barrier = cfg.cro;
        LhmSolution l = solve_lhm(sc, load_model(model_path), bids, lo);
        fallbacks = l.fallback_flags;
        sol = std::move(l.solution);
      }
      std::string name = algorithm;
      for (auto& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      Metrics m;
      m.algorithm = name;
      m.running_time = sol.wall_time;
      m.total_cost = sol.total_cost;
      m.served = sol.served_count();
      m.avg_cost_per_user = m.served ? sol.total_cost / static_cast<double>(m.served) : 0.0;
      m.service_rate = sol.service_rate();
      m.offloaded_count = sol.association.offloaded_count();
      m.n_users = sc.users.size();
      const std::string dir = g.out.empty() ? cfg.out_dir : g.out;
      write_output(dir, "solution_" + algorithm + ".csv",
                   solution_csv(sc, sol, fallbacks.empty() ? nullptr : &fallbacks));
      write_output(dir, "metrics_" + algorithm + ".csv", metrics_row(m));
      info(name + ": total cost " + fmt("%.10g", sol.total_cost) + ", service rate " +
           fmt("%.4f", sol.service_rate()) + ", offloaded " +
           std::to_string(m.offloaded_count) + ", runtime " + fmt("%.3f", sol.wall_time) + " s");
      if (sol.optimality == Optimality::BoundGap) {
        info("node budget exhausted, bound gap " + fmt("%.3g", sol.bound_gap));
      }
      return kOk;
    }

    if (*tr) {
      if (g.out.empty()) throw ConfigError("train needs --out for the model file");
      if (cv_folds == 1 || cv_folds == 0 || cv_folds < -1) {
        throw ConfigError("--cv needs at least 2 folds");
      }
      if (cv_folds >= 2) cfg.cv_folds = cv_folds;
      if (c_opt) cfg.svm.c = *c_opt;
      if (gamma_opt) cfg.svm.kernel_gamma = *gamma_opt;
      cfg.validate();
      TrainingSet data;
      if (!data_path.empty()) {
        std::string text;
        try {
          text = read_file(data_path);
        } catch (const IoError& e) {
          throw ConfigError(e.what());
        }
        data = training_set_from_csv(text);
      } else {
        std::vector<Scenario> scenarios;
        if (!scenario_paths.empty()) {
          for (const auto& p : scenario_paths) scenarios.push_back(load_scenario(p));
        } else if (from_seeds > 0) {
          cfg.training.n_scenarios = from_seeds;
          scenarios = training_scenarios(cfg);
        } else {
          throw ConfigError("train needs --data, --from-scenarios or --from-seeds");
        }
        int skipped = 0;
        data = build_training_data(scenarios, cfg.jur, &skipped);
        if (skipped > 0) info("skipped " + std::to_string(skipped) + " infeasible scenarios");
      }
      info("training rows: " + std::to_string(data.size()));
      if (!dump_data.empty()) write_file_atomic(dump_data, training_set_csv(data));
      std::optional<CvResult> cv;
      const SvmModel model = train_configured(cfg, data, &cv);
      if (cv) {
        info("cross-validation: c=" + fmt("%g", cv->best_c) +
             " kernel_gamma=" + fmt("%g", cv->best_kernel_gamma) +
             " validation accuracy " + fmt("%.2f%%", 100.0 * cv->best_accuracy));
      }
      info("training accuracy: " + fmt("%.2f%%", 100.0 * accuracy(model, data)));
      write_file_atomic(g.out, model_to_json(model));
      return kOk;
    }

    if (*cmp || *sw) {
      const bool is_sweep = static_cast<bool>(*sw);
      if (is_sweep && !grid.empty()) {
        cfg.sweep.n_grid = grid;
        cfg.validate();
      }
      std::optional<SvmModel> model;
      const std::string& mpath = is_sweep ? sw_model : cmp_model;
      if (!mpath.empty()) model = load_model(mpath);
      PipelineOpts po;
      po.run_sweep = is_sweep;
      po.mask_timing = is_sweep ? sw_no_timing : no_timing;
      po.model = model ? &*model : nullptr;
      const PipelineResult r = run_pipeline(cfg, cfg.out_dir, po);
      if (!model) {
        info("trained on " + std::to_string(r.training_rows) + " rows, training accuracy " +
             fmt("%.2f%%", 100.0 * r.training_accuracy));
      }
      std::vector<bool> ok;
      if (is_sweep) {
        for (const auto& row : r.sweep->rows) {
          ok.push_back(!row.failed);
          info(std::to_string(row.n_users) + " users, " + row.algorithm + ": service " +
               (row.failed ? std::string("failed") : fmt("%.4f", row.service_rate)));
        }
      } else {
        if (!g.quiet) print_table(out, r.comparison);
        for (const auto& m : r.comparison.metrics) ok.push_back(!m.failed);
      }
      info("wrote " + std::to_string(r.files.size()) + " files to " + cfg.out_dir);
      return any_succeeded(ok) ? kOk : kInfeasible;
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what();
    if (!e.blocking_users().empty()) err << " (blocking users: " << blocking_list(e) << ")";
    err << '\n';
    return kInfeasible;
  } catch (const NotConvergedError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kInfeasible;
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const TooLargeError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

int run(int argc, char** argv) { return run(argc, argv, std::cout, std::cerr); }

}  // namespace hetnet::cli

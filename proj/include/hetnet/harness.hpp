#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/config.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/lhm.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/svm.hpp"

namespace hetnet {

struct Metrics {
  std::string algorithm;  // DSM, JUR or LHM
  double running_time = 0.0;  // s
  double avg_cost_per_user = 0.0;  // total cost / served users
  double service_rate = 0.0;
  std::size_t offloaded_count = 0;
  std::uint64_t scenario_seed = 0;
  std::size_t n_users = 0;
  double total_cost = 0.0;
  std::size_t served = 0;
  bool failed = false;
  std::string failure;
};

struct UserCostRow {
  int user_id = 0;
  std::string algorithm;
  double cost = 0.0;
};

struct ComparisonOpts {
  JurOpts jur;
  LhmOpts lhm;
};

struct Comparison {
  std::vector<Metrics> metrics;  // DSM, JUR, LHM
  std::vector<UserCostRow> per_user;
  std::optional<JurSolution> dsm;
  std::optional<JurSolution> jur;
  std::optional<LhmSolution> lhm;
  std::string scenario_hash;
  std::string bid_table_hash;
};

/// DSM, JUR and LHM on one scenario and one bid table. Solver failures become
/// failed rows. Timing excludes bid-table construction.
Comparison run_comparison(const Scenario& scenario, const SvmModel& model,
                          const ComparisonOpts& opts = {});

struct SweepRow {
  std::size_t n_users = 0;
  std::string algorithm;
  double service_rate = 0.0;
  double avg_cost = 0.0;
  bool failed = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// One comparison per load. Every load reuses `seed`, so a larger population
/// extends the smaller one user for user.
SweepResult sweep_load(const ScenarioConfig& base, const std::vector<std::size_t>& n_grid,
                       const SvmModel& model, std::uint64_t seed,
                       const ComparisonOpts& opts = {});

/// table1.csv: algorithm,running_time_s,avg_cost_per_user,service_rate,offloaded
/// With mask_timing the running time column reads "masked".
std::string table1_csv(const Comparison& cmp, bool mask_timing);
/// fig2_cost.csv: user_id,algorithm,cost
std::string fig2_csv(const Comparison& cmp);
/// fig3_service.csv: n_users,algorithm,service_rate
std::string fig3_csv(const SweepResult& sweep);

struct OutputFile {
  std::string name;
  std::string hash;
  std::size_t bytes = 0;
};

struct ManifestInfo {
  std::uint64_t master_seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<OutputFile> extra_files;  // written by the caller, listed too
  std::string scenario_hash;
  std::string bid_table_hash;
  std::string model_hash;
};

/// Writes whichever of table1/fig2 (comparison) and fig3 (sweep) apply, then
/// manifest.json. Throws ConfigError when there is nothing to write.
std::vector<OutputFile> emit_plot_data(const Comparison* cmp, const SweepResult* sweep,
                                       const std::filesystem::path& out_dir,
                                       const ManifestInfo& info, bool mask_timing);

/// Writes a file atomically and records its hash.
OutputFile write_output(const std::filesystem::path& out_dir, const std::string& name,
                        const std::string& content);

struct PipelineOpts {
  bool run_sweep = false;
  bool mask_timing = false;
  /// Use this model instead of training one.
  const SvmModel* model = nullptr;
};

struct PipelineResult {
  Scenario scenario;
  SvmModel model;
  std::size_t training_rows = 0;
  double training_accuracy = 0.0;
  std::optional<CvResult> cv;
  Comparison comparison;
  std::optional<SweepResult> sweep;
  std::vector<OutputFile> files;
};

/// generate -> label -> train -> compare (-> sweep), all seeded from
/// config.seed through named sub-streams, outputs under out_dir.
PipelineResult run_pipeline(const RunConfig& config, const std::filesystem::path& out_dir,
                            const PipelineOpts& opts = {});

/// The scenarios the pipeline labels for training.
std::vector<Scenario> training_scenarios(const RunConfig& config);

/// Trains with the configured hyperparameters, cross-validating first when
/// cv_folds >= 2. The SVM seed comes from the master seed.
SvmModel train_configured(const RunConfig& config, const TrainingSet& data,
                          std::optional<CvResult>* cv = nullptr);

}  // namespace hetnet

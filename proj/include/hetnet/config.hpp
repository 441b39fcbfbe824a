#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hetnet/cro.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/svm.hpp"

namespace hetnet {

struct TrainingConfig {
  std::size_t n_scenarios = 10;
  std::size_t n_users = 300;
};

struct SweepConfig {
  std::vector<std::size_t> n_grid{300, 320, 340, 360, 380, 400, 420, 440, 460, 480, 500};
  /// MBS bandwidth used by the sweep; unset keeps the scenario value.
  std::optional<double> mbs_w_max = 1.5e8;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  ScenarioConfig scenario;
  JurOpts jur;
  BarrierOpts cro;
  SvmParams svm;
  int cv_folds = 0;  // 0 disables cross-validation
  std::vector<double> cv_c{0.1, 1.0, 10.0, 100.0};
  std::vector<double> cv_gamma{0.01, 0.1, 1.0};
  TrainingConfig training;
  SweepConfig sweep;

  std::vector<std::pair<double, double>> cv_grid() const;
  void validate() const;
};

/// Parses a JSON config. Missing keys keep their defaults, unknown keys are
/// errors. Throws ConfigError with the offending field path.
RunConfig run_config_from_json(std::string_view text);
std::string run_config_to_json(const RunConfig& config);

}  // namespace hetnet

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hetnet/scenario.hpp"

namespace hetnet {

/// Labels: +1 for MBS-served (mu = 1), -1 for offloaded.
inline int label_of_mu(int mu) { return mu == 1 ? 1 : -1; }
inline int mu_of_label(int y) { return y > 0 ? 1 : 0; }

struct TrainingSet {
  std::vector<FeatureVector> x;
  std::vector<int> y;

  std::size_t size() const { return x.size(); }
  void add(const FeatureVector& features, int label) {
    x.push_back(features);
    y.push_back(label);
  }
};

struct ScalingParams {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector std = FeatureVector::Ones();

  static ScalingParams identity() { return {}; }
  static ScalingParams fit(const std::vector<FeatureVector>& x);
  FeatureVector apply(const FeatureVector& u) const {
    return (u - mean).cwiseQuotient(std);
  }
};

struct SvmModel {
  std::vector<FeatureVector> support_vectors;  // scaled
  std::vector<double> alphas;                  // signed: y_i * alpha_i
  double bias = 0.0;
  double kernel_gamma = 0.1;
  double c = 10.0;
  ScalingParams scaling;
};

struct SvmParams {
  double c = 10.0;
  double kernel_gamma = 0.1;
  double tol = 1e-3;
  int max_passes = 50;  // one pass = N pair updates
  std::uint64_t seed = 0;
};

struct SvmTrainReport {
  std::int64_t iterations = 0;
  double kkt_violation = 0.0;  // max violating pair gap at exit
  bool converged = false;
};

/// exp(-gamma ||u - v||^2). Throws ConfigError unless gamma > 0.
double kernel(const FeatureVector& u, const FeatureVector& v, double kernel_gamma);

/// Soft-margin dual solved by SMO with second-order working-set selection.
/// The seed permutes the scan order, which decides ties.
SvmModel train(const TrainingSet& data, const SvmParams& params,
               SvmTrainReport* report = nullptr);

double decision_value(const SvmModel& model, const FeatureVector& u);

/// mu = 1 iff decision_value >= 0.
int predict(const SvmModel& model, const FeatureVector& u);

double accuracy(const SvmModel& model, const TrainingSet& data);

/// sum |alpha| - 1/2 sum_ij alpha_i alpha_j K(sv_i, sv_j), signed alphas.
double dual_objective(const SvmModel& model);

struct CvEntry {
  double c = 0.0;
  double kernel_gamma = 0.0;
  double accuracy = 0.0;  // mean validation accuracy over folds
};

struct CvResult {
  double best_c = 0.0;
  double best_kernel_gamma = 0.0;
  double best_accuracy = 0.0;
  std::vector<CvEntry> table;
};

/// k-fold grid search. Folds come from a seeded shuffle; ties on accuracy go
/// to the smaller c, then the smaller kernel_gamma.
CvResult cross_validate(const TrainingSet& data, const std::vector<std::pair<double, double>>& grid,
                        int folds, const SvmParams& base);

std::string model_to_json(const SvmModel& model);
SvmModel model_from_json(std::string_view text);

/// CSV with the six features in order followed by the label.
std::string training_set_csv(const TrainingSet& data);
TrainingSet training_set_from_csv(std::string_view text);

}  // namespace hetnet

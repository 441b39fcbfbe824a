#pragma once

#include <vector>

#include "hetnet/cro.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/svm.hpp"

namespace hetnet {

struct LhmOpts {
  BarrierOpts barrier;
  /// Re-pin infeasible predictions and flip users off an exhausted MBS.
  bool repair = true;
};

struct LhmSolution {
  JurSolution solution;
  std::vector<int> predicted_mu;    // raw classifier output
  std::vector<int> fallback_flags;  // 1 for users moved by repair
  int fallbacks = 0;
  /// Fraction of users whose final mu matches a reference association, or a
  /// negative value when none was supplied.
  double svm_agreement = -1.0;
};

/// JUR-labelled rows (features_of(user), label of mu) from each scenario, in
/// scenario then user order. Infeasible scenarios are skipped and counted.
TrainingSet build_training_data(const std::vector<Scenario>& scenarios, const JurOpts& opts = {},
                                int* skipped = nullptr);

/// Predict, repair, allocate with the barrier CRO, price offloaded users at
/// their best bid.
LhmSolution solve_lhm(const Scenario& scenario, const SvmModel& model, const BidTable& bids,
                      const LhmOpts& opts = {});

/// Same pipeline with the association supplied directly (e.g. JUR labels).
LhmSolution solve_lhm_with_predictions(const Scenario& scenario, std::vector<int> predicted_mu,
                                       const BidTable& bids, const LhmOpts& opts = {});

/// Fraction of users with equal mu.
double association_agreement(const Association& a, const Association& b);

}  // namespace hetnet

#include "hetnet/lhm.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "hetnet/errors.hpp"
#include "hetnet/parallel.hpp"

namespace hetnet {

TrainingSet build_training_data(const std::vector<Scenario>& scenarios, const JurOpts& opts,
                                int* skipped) {
  std::vector<TrainingSet> parts(scenarios.size());
  std::vector<int> failed(scenarios.size(), 0);
  parallel_for(scenarios.size(), [&](std::size_t s) {
    const Scenario& sc = scenarios[s];
    try {
      const BidTable bids = build_bid_table(sc);
      const JurSolution jur = solve_jur_bnb(sc, bids, opts);
      for (std::size_t i = 0; i < sc.users.size(); ++i) {
        parts[s].add(features_of(sc.users[i], sc), label_of_mu(jur.association.mu[i]));
      }
    } catch (const InfeasibleError&) {
      failed[s] = 1;
    }
  });
  TrainingSet data;
  int n_failed = 0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    n_failed += failed[s];
    for (std::size_t t = 0; t < parts[s].size(); ++t) data.add(parts[s].x[t], parts[s].y[t]);
  }
  if (skipped) *skipped = n_failed;
  return data;
}

LhmSolution solve_lhm_with_predictions(const Scenario& scenario, std::vector<int> predicted_mu,
                                       const BidTable& bids, const LhmOpts& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = scenario.users.size();
  if (predicted_mu.size() != n) throw ConfigError("one prediction per user is required");

  LhmSolution out;
  out.predicted_mu = predicted_mu;
  out.fallback_flags.assign(n, 0);
  std::vector<int> mu = std::move(predicted_mu);

  auto can_offload = [&](std::size_t i) {
    return bids.best_bid(i) != nullptr && delay_feasible(scenario.users[i], false, scenario.delay);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] == 0 && !can_offload(i)) {
      if (!opts.repair) throw InfeasibleError("prediction offloads a user without a valid bid",
                                              {scenario.users[i].id});
      mu[i] = 1;
      out.fallback_flags[i] = 1;
    }
  }

  CroSolution cro;
  std::vector<std::size_t> mbs_users;
  for (;;) {
    mbs_users.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mu[i] == 1) mbs_users.push_back(i);
    }
    try {
      cro = solve_cro_barrier(CroInstance::from_scenario(scenario, mbs_users), opts.barrier);
      break;
    } catch (const InfeasibleError& e) {
      if (!opts.repair) throw;
      // Move the MBS user with the cheapest valid bid to its SBS.
      std::size_t pick = n;
      double cheapest = std::numeric_limits<double>::infinity();
      for (auto i : mbs_users) {
        if (!can_offload(i)) continue;
        const double total = bids.best_bid(i)->total;
        if (total < cheapest) {
          cheapest = total;
          pick = i;
        }
      }
      if (pick == n) {
        throw InfeasibleError(std::string("repair exhausted: ") + e.what(),
                              e.blocking_users());
      }
      mu[pick] = 0;
      out.fallback_flags[pick] = 1;
    }
  }

  for (int f : out.fallback_flags) out.fallbacks += f;
  out.solution = assemble_solution(scenario, bids, mu, std::move(mbs_users), std::move(cro), {});
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.solution.wall_time = std::round(dt * 1000.0) / 1000.0;
  return out;
}

LhmSolution solve_lhm(const Scenario& scenario, const SvmModel& model, const BidTable& bids,
                      const LhmOpts& opts) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> mu(scenario.users.size());
  parallel_for(mu.size(), [&](std::size_t i) {
    mu[i] = predict(model, features_of(scenario.users[i], scenario));
  });
  LhmSolution out = solve_lhm_with_predictions(scenario, std::move(mu), bids, opts);
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.solution.wall_time = std::round(dt * 1000.0) / 1000.0;
  return out;
}

double association_agreement(const Association& a, const Association& b) {
  if (a.mu.size() != b.mu.size()) throw ConfigError("associations differ in size");
  if (a.mu.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.mu.size(); ++i) same += a.mu[i] == b.mu[i] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(a.mu.size());
}

}  // namespace hetnet

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetnet/cro.hpp"
#include "hetnet/pricing.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

/// Per user (indexed like Scenario::users): mu = 1 for MBS-served, 0 for
/// offloaded; serving station is the MBS id or the winning SBS id.
struct Association {
  std::vector<int> mu;
  std::vector<StationId> serving;

  std::size_t offloaded_count() const;
};

enum class Optimality { Exact, BoundGap };

struct JurSolution {
  Association association;
  /// Scenario indices of the users in `resources`, ascending.
  std::vector<std::size_t> mbs_users;
  CroSolution resources;
  /// False for users a solver had to drop (DSM under bandwidth exhaustion).
  std::vector<bool> served;
  /// Serving-station allocation and charged cost per user (0 when unserved).
  std::vector<double> user_p;
  std::vector<double> user_w;
  std::vector<double> user_cost;
  double total_cost = 0.0;
  double wall_time = 0.0;  // s
  Optimality optimality = Optimality::Exact;
  double bound_gap = 0.0;  // relative
  std::int64_t nodes = 0;

  std::size_t served_count() const;
  double service_rate() const;
};

struct JurOpts {
  std::int64_t node_budget = 1'000'000;
};

/// Users that may not be offloaded (no bid, or offload delay infeasible) are
/// pinned to the MBS, users whose MBS delay is infeasible are pinned
/// offloaded. Entry: -1 free, 0 pinned offloaded, 1 pinned to MBS.
/// Throws InfeasibleError when a user has no admissible option.
std::vector<int> association_pins(const Scenario& scenario, const BidTable& bids);

/// Builds the solution for a given mu vector (every user served): runs the
/// reference CRO on the MBS set and adds the best-bid totals of the offloaded
/// users. Throws InfeasibleError if the MBS set does not fit.
JurSolution evaluate_association(const Scenario& scenario, const BidTable& bids,
                                 const std::vector<int>& mu);

/// Fills in association, per-user costs and the objective from a resource
/// allocation for the users in `mbs_users` (all others offloaded unless
/// `served` marks them dropped).
JurSolution assemble_solution(const Scenario& scenario, const BidTable& bids,
                              const std::vector<int>& mu, std::vector<std::size_t> mbs_users,
                              CroSolution resources, std::vector<bool> served);

/// Enumerates every admissible association. Throws TooLargeError for N > 20.
JurSolution solve_jur_exhaustive(const Scenario& scenario, const BidTable& bids);

/// Depth-first branch-and-bound on mu with a Lagrangian bound on the shared
/// bandwidth. Returns the optimum, or the incumbent with its bound gap when
/// the node budget runs out.
JurSolution solve_jur_bnb(const Scenario& scenario, const BidTable& bids,
                          const JurOpts& opts = {});

/// Direct serving: everyone on the MBS; when the bandwidth does not suffice,
/// users are dropped largest minimum-bandwidth first and marked unserved.
JurSolution solve_dsm(const Scenario& scenario);

struct SolutionAudit {
  double objective_error = 0.0;  // relative
  double bandwidth_excess = 0.0;  // sum(w) / W_max - 1, clipped at 0
  double reliability_deficit = 0.0;  // max over served MBS users, relative to r_th
  double power_excess = 0.0;
  int delay_violations = 0;
  int invalid_offloads = 0;  // offloaded without a bid

  bool passed(double tol = 1e-9) const;
};

/// Recomputes the objective and all constraints from the returned association,
/// allocation and bids.
SolutionAudit audit_solution(const Scenario& scenario, const BidTable& bids,
                             const JurSolution& sol);

/// CSV: user_id,mu,serving_station,p,w,user_cost,delay,served_flag
/// (plus a trailing fallbacks column when `fallback_flags` is given).
std::string solution_csv(const Scenario& scenario, const JurSolution& sol,
                         const std::vector<int>* fallback_flags = nullptr);

}  // namespace hetnet

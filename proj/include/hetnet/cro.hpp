#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnet/link.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

struct CroUser {
  User user;
  double gain = 0.0;  // mean amplitude gain to the MBS
  double n0 = 0.0;
};

/// Resource allocation for a fixed set of MBS-served users.
struct CroInstance {
  std::vector<CroUser> served_users;
  StationParams mbs;

  /// The given users (indices into scenario.users), served by the MBS.
  static CroInstance from_scenario(const Scenario& scenario,
                                   const std::vector<std::size_t>& user_indices);
  std::vector<LinkCostModel> link_models(double bandwidth_price = 0.0) const;
};

struct CroTraceRow {
  int iteration = 0;
  double cost = 0.0;
  double max_residual = 0.0;  // largest relative reliability slack
  double nu = 0.0;
};

struct CroSolution {
  Eigen::VectorXd p;
  Eigen::VectorXd w;
  double total_cost = 0.0;
  Eigen::VectorXd lambda;  // reliability multipliers
  double nu = 0.0;         // shared-bandwidth price
  int iterations = 0;
  bool converged = false;
  std::vector<CroTraceRow> trace;
};

class NotConvergedError : public std::runtime_error {
 public:
  NotConvergedError(const std::string& what, CroSolution last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const CroSolution& last_iterate() const { return last_; }

 private:
  CroSolution last_;
};

/// g(p, w) = E[r] - r_th (1 - delta_r).
double reliability_slack(double p, double w, const User& user, double gain, double n0);

/// Users (instance positions) to drop, largest minimum-bandwidth first, until
/// the rest fit in W_max at full power. Empty when the instance is feasible.
std::vector<std::size_t> bandwidth_blocking_set(const CroInstance& inst);

/// Separable reference solver: per-user golden-section minimisation at the
/// bandwidth price nu, with nu bisected so that sum(w) meets W_max when the
/// unpriced demand exceeds it. Throws InfeasibleError on bandwidth exhaustion.
CroSolution solve_cro_reference(const CroInstance& inst);

struct BarrierState {
  Eigen::VectorXd p;
  Eigen::VectorXd w;
  Eigen::VectorXd lambda;  // per-user barrier weights
  double barrier_weight = 1.0;  // common scale: shrink^k
  double nu = 0.0;
  std::vector<double> penalty_history;  // sum_i lambda_i ln g_i per iteration
};

struct BarrierOpts {
  double tol = 1e-8;            // max relative block change
  int max_iters = 500;
  double match_tol = 1e-4;      // relative agreement with the reference solver
  double shrink = 0.5;          // lambda <- shrink * lambda each iteration
  double start_inflation = 1.05;
  /// Also run the reference solver and throw if costs differ by > match_tol.
  bool verify_against_reference = false;
  std::function<void(const BarrierState&)> observer;
};

/// Penalized Lagrangian  sum_i c_p p_i + (gamma c_w + nu) w_i - lambda_i ln g_i.
/// Returns +inf outside the interior (some g_i <= 0).
double penalized_lagrangian(const CroInstance& inst, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& lambda,
                            double nu = 0.0);

struct LagrangianGradient {
  Eigen::VectorXd dp;
  Eigen::VectorXd dw;
  Eigen::VectorXd dlambda;
};

LagrangianGradient penalized_lagrangian_gradient(const CroInstance& inst,
                                                 const Eigen::VectorXd& p,
                                                 const Eigen::VectorXd& w,
                                                 const Eigen::VectorXd& lambda,
                                                 double nu = 0.0);

/// Log-barrier multiplier scheme: each iteration shrinks the barrier weights
/// lambda, then minimises the penalized Lagrangian over p and then over w, with
/// the shared bandwidth handled by a price nu. Iterates stay strictly inside
/// the reliability constraints.
CroSolution solve_cro_barrier(const CroInstance& inst, const BarrierOpts& opts = {});

struct KktReport {
  double stationarity = 0.0;
  double complementary_slackness = 0.0;
  double reliability_activity = 0.0;
  double primal_infeasibility = 0.0;
  double tol = 0.0;

  double max_residual() const;
  bool passed() const { return max_residual() <= tol; }
};

/// KKT audit of a CRO solution. Multipliers are recovered from the solution
/// itself, so the audit does not trust what a solver reports.
KktReport check_kkt(const CroInstance& inst, const CroSolution& sol, double tol);

/// CSV: iteration,cost,max_residual,nu
std::string cro_trace_csv(const CroSolution& sol);

}  // namespace hetnet

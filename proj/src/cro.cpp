#include "hetnet/cro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/pricing.hpp"
#include "price_search.hpp"

namespace hetnet {

namespace {

constexpr double kLn2 = std::numbers::ln2;

std::vector<int> user_ids(const CroInstance& inst, const std::vector<std::size_t>& idx) {
  std::vector<int> ids;
  ids.reserve(idx.size());
  for (auto i : idx) ids.push_back(inst.served_users[i].user.id);
  return ids;
}

void require_feasible(const CroInstance& inst, const std::vector<LinkCostModel>& models) {
  std::vector<std::size_t> dead;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!models[i].feasible()) dead.push_back(i);
  }
  if (!dead.empty()) {
    throw InfeasibleError("users without a usable MBS link", user_ids(inst, dead));
  }
  auto blocking = bandwidth_blocking_set(inst);
  if (!blocking.empty()) {
    throw InfeasibleError("MBS bandwidth exhausted", user_ids(inst, blocking));
  }
}

double initial_price_scale(const StationParams& mbs) {
  const double c = mbs.bandwidth_cost();
  return c > 0.0 ? c : 1.0;
}

}  // namespace

CroInstance CroInstance::from_scenario(const Scenario& scenario,
                                       const std::vector<std::size_t>& user_indices) {
  CroInstance inst;
  inst.mbs = scenario.mbs;
  inst.served_users.reserve(user_indices.size());
  for (auto i : user_indices) {
    const User& u = scenario.users[i];
    inst.served_users.push_back({u, u.gain_to(scenario.mbs.id), u.mean_noise});
  }
  return inst;
}

std::vector<LinkCostModel> CroInstance::link_models(double bandwidth_price) const {
  std::vector<LinkCostModel> models;
  models.reserve(served_users.size());
  for (const auto& su : served_users) {
    models.push_back(link_model(su.user, mbs, su.gain, su.n0, bandwidth_price));
  }
  return models;
}

double reliability_slack(double p, double w, const User& user, double gain, double n0) {
  return expected_rate(p, w, gain, n0) - min_rate_requirement(user);
}

std::vector<std::size_t> bandwidth_blocking_set(const CroInstance& inst) {
  const auto models = inst.link_models();
  std::vector<double> need(models.size());
  double total = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    need[i] = models[i].feasible() ? models[i].min_bandwidth()
                                   : std::numeric_limits<double>::infinity();
    total += need[i];
  }
  std::vector<std::size_t> order(models.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return need[a] > need[b]; });
  std::vector<std::size_t> dropped;
  // Strict: a demand exactly at W_max needs an infinite price.
  for (std::size_t k = 0; k < order.size() && !(total < inst.mbs.w_max); ++k) {
    dropped.push_back(order[k]);
    total = 0.0;
    for (std::size_t j = k + 1; j < order.size(); ++j) total += need[order[j]];
  }
  return dropped;
}

// --- reference solver -----------------------------------------------------

namespace {

struct Allocation {
  std::vector<LinkAllocation> links;
  double total_w = 0.0;
};

Allocation allocate_at(const std::vector<LinkCostModel>& base, double nu) {
  Allocation out;
  out.links.reserve(base.size());
  for (auto m : base) {
    m.bandwidth_price = nu;
    out.links.push_back(minimize_link_cost(m));
    out.total_w += out.links.back().w;
  }
  return out;
}

}  // namespace

CroSolution solve_cro_reference(const CroInstance& inst) {
  const std::size_t n = inst.served_users.size();
  CroSolution sol;
  sol.p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  sol.w = sol.p;
  sol.lambda = sol.p;
  sol.converged = true;
  if (n == 0) return sol;

  const auto models = inst.link_models();
  require_feasible(inst, models);

  double nu = 0.0;
  Allocation alloc = allocate_at(models, 0.0);
  if (alloc.total_w > inst.mbs.w_max) {
    int evals = 0;
    nu = detail::find_bandwidth_price(
        [&](double price) {
          ++evals;
          return allocate_at(models, price).total_w;
        },
        inst.mbs.w_max, 0.0, initial_price_scale(inst.mbs));
    alloc = allocate_at(models, nu);
    sol.iterations = evals;
  }

  const double beta = inst.mbs.bandwidth_cost() + nu;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    sol.p[k] = alloc.links[i].p;
    sol.w[k] = alloc.links[i].w;
    sol.lambda[k] = beta / alloc.links[i].s;
    sol.total_cost += alloc.links[i].cost;
  }
  sol.nu = nu;
  sol.trace.push_back({sol.iterations, sol.total_cost, 0.0, nu});
  return sol;
}

// --- penalized Lagrangian -------------------------------------------------

double penalized_lagrangian(const CroInstance& inst, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& lambda,
                            double nu) {
  const double beta = inst.mbs.bandwidth_cost() + nu;
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const auto& su = inst.served_users[static_cast<std::size_t>(i)];
    const double g = reliability_slack(p[i], w[i], su.user, su.gain, su.n0);
    if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
    total += inst.mbs.c_p * p[i] + beta * w[i] - lambda[i] * std::log(g);
  }
  return total;
}

LagrangianGradient penalized_lagrangian_gradient(const CroInstance& inst,
                                                 const Eigen::VectorXd& p,
                                                 const Eigen::VectorXd& w,
                                                 const Eigen::VectorXd& lambda,
                                                 double nu) {
  const double beta = inst.mbs.bandwidth_cost() + nu;
  LagrangianGradient grad;
  grad.dp.resize(p.size());
  grad.dw.resize(p.size());
  grad.dlambda.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const auto& su = inst.served_users[static_cast<std::size_t>(i)];
    const double k = su.gain * su.gain / su.n0;
    const double g = reliability_slack(p[i], w[i], su.user, su.gain, su.n0);
    const double g_p = w[i] * k / ((1.0 + p[i] * k) * kLn2);
    const double g_w = std::log1p(p[i] * k) / kLn2;
    grad.dp[i] = inst.mbs.c_p - lambda[i] * g_p / g;
    grad.dw[i] = beta - lambda[i] * g_w / g;
    grad.dlambda[i] = -std::log(g);
  }
  return grad;
}

// --- barrier solver -------------------------------------------------------

namespace {

// Power block. With w at its best response w = R/l + lambda/beta, the
// stationarity condition in u = ln(1 + p k) reads
//   F(u) = (c_p / k) e^u - beta R ln2 / u^2 - lambda / u = 0,
// F increasing on (0, u_max]. Safeguarded Newton.
double solve_power_block(double c_p, double k, double beta, double rate, double lambda,
                         double u_max, double guess) {
  auto F = [&](double u) {
    return c_p / k * std::exp(u) - beta * rate * kLn2 / (u * u) - lambda / u;
  };
  if (!(c_p > 0.0) || F(u_max) <= 0.0) return u_max;
  double lo = 0.0;
  double hi = u_max;
  double u = (guess > 0.0 && guess < u_max) ? guess : 0.5 * u_max;
  for (int it = 0; it < 200; ++it) {
    const double f = F(u);
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double df = c_p / k * std::exp(u) + 2.0 * beta * rate * kLn2 / (u * u * u) +
                      lambda / (u * u);
    double next = u - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * next) {
      u = next;
      break;
    }
    u = next;
  }
  return u;
}

struct BlockPoint {
  double u = 0.0;
  double p = 0.0;
  double w = 0.0;
};

// Bandwidth block: exact minimiser of beta w - lambda ln(w l - R) given p.
BlockPoint solve_blocks(const LinkCostModel& m, double beta, double lambda, double guess) {
  BlockPoint b;
  const double u_max = std::log1p(m.p_max * m.snr_per_watt);
  b.u = solve_power_block(m.c_p, m.snr_per_watt, beta, m.rate, lambda, u_max, guess);
  b.p = b.u >= u_max ? m.p_max : std::expm1(b.u) / m.snr_per_watt;
  const double l = std::log1p(b.p * m.snr_per_watt) / kLn2;
  b.w = (m.rate + lambda * l / beta) / l;
  return b;
}

}  // namespace

CroSolution solve_cro_barrier(const CroInstance& inst, const BarrierOpts& opts) {
  const std::size_t n = inst.served_users.size();
  const auto N = static_cast<Eigen::Index>(n);
  CroSolution sol;
  sol.p = Eigen::VectorXd::Zero(N);
  sol.w = sol.p;
  sol.lambda = sol.p;
  if (n == 0) {
    sol.converged = true;
    return sol;
  }
  const auto models = inst.link_models();
  require_feasible(inst, models);

  const double c_w = inst.mbs.bandwidth_cost();
  const double c_p = inst.mbs.c_p;

  // Strictly interior start: inflated uncoupled optimum.
  BarrierState state;
  state.p.resize(N);
  state.w.resize(N);
  state.lambda.resize(N);
  Eigen::VectorXd u(N);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const LinkAllocation a = minimize_link_cost(models[i]);
    state.p[k] = std::min(opts.start_inflation * a.p, models[i].p_max);
    state.w[k] = opts.start_inflation * a.w;
    const auto& su = inst.served_users[i];
    const double g = reliability_slack(state.p[k], state.w[k], su.user, su.gain, su.n0);
    if (!(g > 0.0)) {
      throw InteriorStartFailed("no strictly feasible start for user " +
                                std::to_string(su.user.id));
    }
    const double l = std::log1p(state.p[k] * models[i].snr_per_watt) / kLn2;
    // Weight that makes the start w the bandwidth-block optimum.
    state.lambda[k] = c_w > 0.0 ? c_w * g / l
                                : c_p * g / (state.w[k] * models[i].snr_per_watt /
                                             ((1.0 + state.p[k] * models[i].snr_per_watt) * kLn2));
    u[k] = std::log1p(state.p[k] * models[i].snr_per_watt);
  }

  auto current_cost = [&] { return c_p * state.p.sum() + c_w * state.w.sum(); };
  auto max_rel_slack = [&] {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const auto& su = inst.served_users[i];
      r = std::max(r, reliability_slack(state.p[k], state.w[k], su.user, su.gain, su.n0) /
                          su.user.r_th);
    }
    return r;
  };

  std::vector<BlockPoint> blocks(n);
  auto solve_all = [&](double nu) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      blocks[i] = solve_blocks(models[i], c_w + nu, state.lambda[k], u[k]);
      total += blocks[i].w;
    }
    return total;
  };

  double nu_hi = 0.0;  // feasible price of the previous iteration
  bool have_price = false;
  for (int it = 1; it <= opts.max_iters; ++it) {
    // lambda block
    state.lambda *= opts.shrink;
    state.barrier_weight *= opts.shrink;

    // p and w blocks at the bandwidth price that clears W_max.
    double nu = 0.0;
    if (solve_all(0.0) > inst.mbs.w_max) {
      const double hint = have_price && nu_hi > 0.0 ? nu_hi : initial_price_scale(inst.mbs);
      nu = detail::find_bandwidth_price(solve_all, inst.mbs.w_max, 0.0, hint);
      solve_all(nu);
      nu_hi = nu;
      have_price = true;
    }

    double change = 0.0;
    double penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      const auto& su = inst.served_users[i];
      double w_new = blocks[i].w;
      // Keep the stored iterate strictly interior after rounding.
      while (!(reliability_slack(blocks[i].p, w_new, su.user, su.gain, su.n0) > 0.0)) {
        w_new = std::nextafter(w_new, std::numeric_limits<double>::infinity()) * (1.0 + 1e-15);
      }
      change = std::max(change, std::abs(blocks[i].p - state.p[k]) /
                                    std::max(std::abs(blocks[i].p), 1e-300));
      change = std::max(change, std::abs(w_new - state.w[k]) / std::max(w_new, 1e-300));
      state.p[k] = blocks[i].p;
      state.w[k] = w_new;
      u[k] = blocks[i].u;
      penalty += state.lambda[k] *
                 std::log(reliability_slack(state.p[k], state.w[k], su.user, su.gain, su.n0));
    }
    state.nu = nu;
    state.penalty_history.push_back(penalty);
    sol.trace.push_back({it, current_cost(), max_rel_slack(), nu});
    if (opts.observer) opts.observer(state);
    sol.iterations = it;
    if (change < opts.tol) {
      sol.converged = true;
      break;
    }
  }

  sol.p = state.p;
  sol.w = state.w;
  sol.nu = state.nu;
  sol.total_cost = current_cost();
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const auto& su = inst.served_users[i];
    // Dual estimate lambda_i / g_i of the reliability multiplier.
    sol.lambda[k] =
        state.lambda[k] / reliability_slack(state.p[k], state.w[k], su.user, su.gain, su.n0);
  }
  if (!sol.converged) {
    throw NotConvergedError("barrier iteration hit max_iters=" + std::to_string(opts.max_iters),
                            sol);
  }
  if (opts.verify_against_reference) {
    const double ref = solve_cro_reference(inst).total_cost;
    if (std::abs(sol.total_cost - ref) > opts.match_tol * std::abs(ref)) {
      throw NotConvergedError("barrier cost disagrees with the reference solver", sol);
    }
  }
  return sol;
}

// --- KKT audit --------------------------------------------------------------

double KktReport::max_residual() const {
  return std::max({stationarity, complementary_slackness, reliability_activity,
                   primal_infeasibility});
}

KktReport check_kkt(const CroInstance& inst, const CroSolution& sol, double tol) {
  KktReport r;
  r.tol = tol;
  const double c_p = inst.mbs.c_p;
  const double beta = inst.mbs.bandwidth_cost() + sol.nu;
  double total_w = 0.0;
  for (std::size_t i = 0; i < inst.served_users.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const auto& su = inst.served_users[i];
    const double kk = su.gain * su.gain / su.n0;
    const double p = sol.p[k];
    const double w = sol.w[k];
    total_w += w;
    const double g_p = w * kk / ((1.0 + p * kk) * kLn2);
    const double g_w = std::log1p(p * kk) / kLn2;
    const bool at_cap = p >= inst.mbs.p_max * (1.0 - 1e-12);
    if (!at_cap && c_p > 0.0) {
      // Multiplier from the power condition, audited on the bandwidth condition.
      const double y = c_p / g_p;
      r.stationarity = std::max(r.stationarity, std::abs(beta - y * g_w) / beta);
    } else {
      const double y = beta / g_w;
      const double scale = std::max(c_p, y * g_p);
      if (scale > 0.0) {
        r.stationarity = std::max(r.stationarity, std::max(0.0, c_p - y * g_p) / scale);
      }
    }
    const double g = reliability_slack(p, w, su.user, su.gain, su.n0);
    r.reliability_activity = std::max(r.reliability_activity, std::abs(g) / su.user.r_th);
    r.primal_infeasibility = std::max(r.primal_infeasibility, std::max(0.0, -g) / su.user.r_th);
    if (p < 0.0 || p > inst.mbs.p_max * (1.0 + 1e-12)) {
      r.primal_infeasibility = std::max(r.primal_infeasibility, 1.0);
    }
  }
  const double w_max = inst.mbs.w_max;
  if (w_max > 0.0) {
    r.primal_infeasibility = std::max(r.primal_infeasibility, std::max(0.0, total_w / w_max - 1.0));
  }
  const double scale = std::max(std::abs(sol.total_cost), 1e-300);
  r.complementary_slackness = std::abs(sol.nu * (w_max - total_w)) / scale;
  if (sol.nu < 0.0) r.complementary_slackness = std::max(r.complementary_slackness, 1.0);
  return r;
}

std::string cro_trace_csv(const CroSolution& sol) {
  std::ostringstream out;
  out << "iteration,cost,max_residual,nu\n";
  char buf[160];
  for (const auto& row : sol.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", row.iteration, row.cost,
                  row.max_residual, row.nu);
    out << buf;
  }
  return out.str();
}

}  // namespace hetnet

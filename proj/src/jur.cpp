#include "hetnet/jur.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "hetnet/errors.hpp"
#include "price_search.hpp"

namespace hetnet {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms_resolution(Clock::time_point start) {
  const auto dt = std::chrono::duration<double>(Clock::now() - start).count();
  return std::round(dt * 1000.0) / 1000.0;
}

double bid_total(const BidTable& bids, std::size_t i) {
  const Bid* b = bids.best_bid(i);
  return b ? b->total : std::numeric_limits<double>::infinity();
}

std::vector<std::size_t> mbs_set(const std::vector<int>& mu) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 1) out.push_back(i);
  }
  return out;
}

// Objective of an association, the same arithmetic assemble_solution uses.
double objective(const BidTable& bids, const std::vector<int>& mu, const CroSolution& cro) {
  double total = cro.total_cost;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0) total += bid_total(bids, i);
  }
  return total;
}

}  // namespace

std::size_t Association::offloaded_count() const {
  return static_cast<std::size_t>(std::count(mu.begin(), mu.end(), 0));
}

std::size_t JurSolution::served_count() const {
  return static_cast<std::size_t>(std::count(served.begin(), served.end(), true));
}

double JurSolution::service_rate() const {
  return served.empty() ? 1.0
                        : static_cast<double>(served_count()) / static_cast<double>(served.size());
}

std::vector<int> association_pins(const Scenario& scenario, const BidTable& bids) {
  std::vector<int> pins(scenario.users.size(), -1);
  std::vector<int> stuck;
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    const User& u = scenario.users[i];
    const bool can_offload =
        bids.best_bid(i) != nullptr && delay_feasible(u, false, scenario.delay);
    const bool can_mbs = delay_feasible(u, true, scenario.delay);
    if (!can_offload && !can_mbs) {
      stuck.push_back(u.id);
    } else if (!can_offload) {
      pins[i] = 1;
    } else if (!can_mbs) {
      pins[i] = 0;
    }
  }
  if (!stuck.empty()) throw InfeasibleError("users meet no delay-feasible server", stuck);
  return pins;
}

JurSolution assemble_solution(const Scenario& scenario, const BidTable& bids,
                              const std::vector<int>& mu, std::vector<std::size_t> mbs_users,
                              CroSolution resources, std::vector<bool> served) {
  const std::size_t n = scenario.users.size();
  JurSolution sol;
  sol.association.mu = mu;
  sol.association.serving.assign(n, -1);
  sol.user_cost.assign(n, 0.0);
  sol.user_p.assign(n, 0.0);
  sol.user_w.assign(n, 0.0);
  sol.served = served.empty() ? std::vector<bool>(n, true) : std::move(served);
  const StationParams& mbs = scenario.mbs;
  for (std::size_t k = 0; k < mbs_users.size(); ++k) {
    const auto i = mbs_users[k];
    const auto e = static_cast<Eigen::Index>(k);
    sol.association.serving[i] = mbs.id;
    sol.user_p[i] = resources.p[e];
    sol.user_w[i] = resources.w[e];
    sol.user_cost[i] = mbs.c_p * sol.user_p[i] + mbs.bandwidth_cost() * sol.user_w[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] == 0 && sol.served[i]) {
      const Bid* b = bids.best_bid(i);
      sol.association.serving[i] = b->sbs_id;
      sol.user_p[i] = b->p;
      sol.user_w[i] = b->w;
      sol.user_cost[i] = b->total;
    }
  }
  sol.total_cost = objective(bids, mu, resources);
  sol.mbs_users = std::move(mbs_users);
  sol.resources = std::move(resources);
  return sol;
}

JurSolution evaluate_association(const Scenario& scenario, const BidTable& bids,
                                 const std::vector<int>& mu) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0 && !bids.best_bid(i)) {
      throw InfeasibleError("offloaded user without a bid", {scenario.users[i].id});
    }
  }
  auto users = mbs_set(mu);
  CroSolution cro = solve_cro_reference(CroInstance::from_scenario(scenario, users));
  return assemble_solution(scenario, bids, mu, std::move(users), std::move(cro), {});
}

// --- exhaustive -------------------------------------------------------------

namespace {

// No association fits: name the MBS-pinned users the bandwidth cannot hold.
[[noreturn]] void throw_no_association(const Scenario& scenario, const std::vector<int>& pins) {
  std::vector<std::size_t> pinned;
  for (std::size_t i = 0; i < pins.size(); ++i) {
    if (pins[i] == 1) pinned.push_back(i);
  }
  std::vector<int> ids;
  for (auto k : bandwidth_blocking_set(CroInstance::from_scenario(scenario, pinned))) {
    ids.push_back(scenario.users[pinned[k]].id);
  }
  throw InfeasibleError("no feasible association", std::move(ids));
}

}  // namespace

JurSolution solve_jur_exhaustive(const Scenario& scenario, const BidTable& bids) {
  const auto start = Clock::now();
  const std::size_t n = scenario.users.size();
  if (n > 20) {
    throw TooLargeError("exhaustive JUR limited to 20 users, got " + std::to_string(n));
  }
  const auto pins = association_pins(scenario, bids);
  std::vector<std::size_t> free_users;
  for (std::size_t i = 0; i < n; ++i) {
    if (pins[i] < 0) free_users.push_back(i);
  }

  std::vector<int> mu(n);
  std::vector<int> best_mu;
  double best_cost = std::numeric_limits<double>::infinity();
  std::int64_t evaluated = 0;
  const std::uint64_t count = std::uint64_t{1} << free_users.size();
  // Bit k set means free user k goes to the MBS; mask 0 offloads everyone.
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t i = 0; i < n; ++i) mu[i] = pins[i] < 0 ? 0 : pins[i];
    for (std::size_t k = 0; k < free_users.size(); ++k) {
      if ((mask >> k) & 1U) mu[free_users[k]] = 1;
    }
    ++evaluated;
    try {
      const auto users = mbs_set(mu);
      const CroSolution cro = solve_cro_reference(CroInstance::from_scenario(scenario, users));
      const double cost = objective(bids, mu, cro);
      if (cost < best_cost) {
        best_cost = cost;
        best_mu = mu;
      }
    } catch (const InfeasibleError&) {
      // bandwidth exhausted for this MBS set
    }
  }
  if (best_mu.empty()) throw_no_association(scenario, pins);
  JurSolution sol = evaluate_association(scenario, bids, best_mu);
  sol.nodes = evaluated;
  sol.wall_time = elapsed_ms_resolution(start);
  return sol;
}

// --- branch and bound ----------------------------------------------------------

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const Scenario& scenario, const BidTable& bids, const JurOpts& opts)
      : sc_(scenario), bids_(bids), opts_(opts), n_(scenario.users.size()) {
    w_max_ = scenario.mbs.w_max;
    models_.reserve(n_);
    bid_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const User& u = scenario.users[i];
      models_.push_back(link_model(u, scenario.mbs, u.gain_to(scenario.mbs.id), u.mean_noise));
      bid_[i] = bid_total(bids, i);
    }
    priced_.resize(n_);
    w_.resize(n_);
  }

  JurSolution run() {
    const auto start = Clock::now();
    const auto pins = association_pins(sc_, bids_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (pins[i] == 1 && !models_[i].feasible()) {
        throw InfeasibleError("user without a usable MBS link", {sc_.users[i].id});
      }
    }

    struct Node {
      std::vector<int> fix;
      double parent_lb;
    };
    std::vector<Node> stack;
    stack.push_back({pins, -std::numeric_limits<double>::infinity()});
    std::int64_t nodes = 0;
    double open_lb = std::numeric_limits<double>::infinity();
    bool exhausted = false;

    while (!stack.empty()) {
      if (nodes >= opts_.node_budget) {
        exhausted = true;
        for (const auto& nd : stack) open_lb = std::min(open_lb, nd.parent_lb);
        break;
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      ++nodes;
      if (node.parent_lb >= prune_level()) continue;

      if (!bound(node.fix)) continue;  // MBS part cannot fit
      consider_incumbent();
      if (lb_ >= prune_level()) continue;

      // Branch on the free user with the largest cost gap at the node's price.
      std::size_t pick = n_;
      double widest = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (node.fix[i] >= 0) continue;
        const double gap = std::abs(priced_[i] - bid_[i]);
        if (gap > widest) {
          widest = gap;
          pick = i;
        }
      }
      if (pick == n_) continue;  // leaf: bound is exact, incumbent already checked
      const int preferred = priced_[pick] < bid_[pick] ? 1 : 0;
      Node other{node.fix, lb_};
      other.fix[pick] = 1 - preferred;
      node.fix[pick] = preferred;
      node.parent_lb = lb_;
      stack.push_back(std::move(other));
      stack.push_back(std::move(node));
    }

    if (best_mu_.empty()) throw_no_association(sc_, pins);
    JurSolution sol = evaluate_association(sc_, bids_, best_mu_);
    sol.nodes = nodes;
    if (exhausted && open_lb < best_cost_) {
      sol.optimality = Optimality::BoundGap;
      sol.bound_gap = (best_cost_ - open_lb) / best_cost_;
    }
    sol.wall_time = elapsed_ms_resolution(start);
    return sol;
  }

 private:
  double prune_level() const { return best_cost_ * (1.0 - 1e-12); }

  // Lagrangian relaxation of the shared bandwidth at price nu: every free
  // user takes the cheaper of its bid and its priced MBS cost. Returns the
  // MBS bandwidth demand and records the dual value.
  double evaluate(const std::vector<int>& fix, double nu) {
    double demand = 0.0;
    double value = -nu * w_max_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (fix[i] == 0) {
        value += bid_[i];
        continue;
      }
      LinkCostModel m = models_[i];
      m.bandwidth_price = nu;
      const LinkAllocation a = minimize_link_cost(m);
      priced_[i] = a.priced_cost;
      w_[i] = a.w;
      if (fix[i] == 1 || priced_[i] < bid_[i]) {
        value += priced_[i];
        demand += a.w;
      } else {
        value += bid_[i];
      }
    }
    lb_ = std::max(lb_, value);
    return demand;
  }

  bool bound(const std::vector<int>& fix) {
    double floor_demand = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (fix[i] == 1) floor_demand += models_[i].min_bandwidth();
    }
    if (!(floor_demand < w_max_) && floor_demand > 0.0) return false;
    lb_ = -std::numeric_limits<double>::infinity();
    double nu = 0.0;
    if (evaluate(fix, 0.0) > w_max_) {
      const double hint = last_nu_ > 0.0 ? last_nu_ : std::max(sc_.mbs.bandwidth_cost(), 1e-300);
      nu = detail::find_bandwidth_price([&](double x) { return evaluate(fix, x); }, w_max_, 0.0,
                                        hint);
      const double best_lb = lb_;
      evaluate(fix, nu);  // leave priced_ and w_ at the feasible price
      lb_ = std::max(lb_, best_lb);
      last_nu_ = nu;
    }
    candidate_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      candidate_[i] = fix[i] >= 0 ? fix[i] : (priced_[i] < bid_[i] ? 1 : 0);
    }
    return true;
  }

  void consider_incumbent() {
    if (candidate_ == last_candidate_) return;
    last_candidate_ = candidate_;
    try {
      const auto users = mbs_set(candidate_);
      const CroSolution cro = solve_cro_reference(CroInstance::from_scenario(sc_, users));
      const double cost = objective(bids_, candidate_, cro);
      if (cost < best_cost_) {
        best_cost_ = cost;
        best_mu_ = candidate_;
      }
    } catch (const InfeasibleError&) {
    }
  }

  const Scenario& sc_;
  const BidTable& bids_;
  JurOpts opts_;
  std::size_t n_;
  double w_max_ = 0.0;
  std::vector<LinkCostModel> models_;
  std::vector<double> bid_;
  std::vector<double> priced_;
  std::vector<double> w_;
  double lb_ = 0.0;
  double last_nu_ = 0.0;
  std::vector<int> candidate_;
  std::vector<int> last_candidate_;
  std::vector<int> best_mu_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

}  // namespace

JurSolution solve_jur_bnb(const Scenario& scenario, const BidTable& bids, const JurOpts& opts) {
  if (opts.node_budget <= 0) throw ConfigError("node_budget must be > 0");
  return BranchAndBound(scenario, bids, opts).run();
}

// --- DSM ------------------------------------------------------------------------

JurSolution solve_dsm(const Scenario& scenario) {
  const auto start = Clock::now();
  const std::size_t n = scenario.users.size();
  std::vector<int> mu(n, 1);
  std::vector<bool> served(n, true);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    if (delay_feasible(scenario.users[i], true, scenario.delay)) {
      candidates.push_back(i);
    } else {
      served[i] = false;
    }
  }
  CroInstance inst = CroInstance::from_scenario(scenario, candidates);
  const auto blocking = bandwidth_blocking_set(inst);
  std::vector<bool> drop(candidates.size(), false);
  for (auto k : blocking) drop[k] = true;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (drop[k]) {
      served[candidates[k]] = false;
    } else {
      kept.push_back(candidates[k]);
    }
  }
  CroSolution cro = solve_cro_reference(CroInstance::from_scenario(scenario, kept));
  // Dropped users are neither offloaded nor charged.
  JurSolution sol = assemble_solution(scenario, BidTable{std::vector<std::vector<Bid>>(n),
                                                         std::vector<int>(n, -1)},
                                      mu, std::move(kept), std::move(cro), std::move(served));
  sol.wall_time = elapsed_ms_resolution(start);
  return sol;
}

// --- audit and export -------------------------------------------------------------

bool SolutionAudit::passed(double tol) const {
  return objective_error <= tol && bandwidth_excess <= tol && reliability_deficit <= 1e-6 &&
         power_excess <= tol && delay_violations == 0 && invalid_offloads == 0;
}

SolutionAudit audit_solution(const Scenario& scenario, const BidTable& bids,
                             const JurSolution& sol) {
  SolutionAudit a;
  const StationParams& mbs = scenario.mbs;
  double recomputed = 0.0;
  double total_w = 0.0;
  for (std::size_t k = 0; k < sol.mbs_users.size(); ++k) {
    const auto i = sol.mbs_users[k];
    const auto e = static_cast<Eigen::Index>(k);
    const User& u = scenario.users[i];
    const double p = sol.resources.p[e];
    const double w = sol.resources.w[e];
    recomputed += mbs.c_p * p + mbs.bandwidth_cost() * w;
    total_w += w;
    const double g = reliability_slack(p, w, u, u.gain_to(mbs.id), u.mean_noise);
    a.reliability_deficit = std::max(a.reliability_deficit, std::max(0.0, -g) / u.r_th);
    a.power_excess = std::max(a.power_excess, std::max(0.0, p / mbs.p_max - 1.0));
    if (sol.association.mu[i] != 1) ++a.invalid_offloads;
  }
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    if (!sol.served[i]) continue;
    const bool on_mbs = sol.association.mu[i] == 1;
    if (!delay_feasible(scenario.users[i], on_mbs, scenario.delay)) ++a.delay_violations;
    if (!on_mbs) {
      const Bid* b = bids.best_bid(i);
      if (!b || b->sbs_id != sol.association.serving[i]) {
        ++a.invalid_offloads;
      } else {
        recomputed += b->total;
      }
    }
  }
  if (mbs.w_max > 0.0) a.bandwidth_excess = std::max(0.0, total_w / mbs.w_max - 1.0);
  else if (total_w > 0.0) a.bandwidth_excess = 1.0;
  const double scale = std::max(std::abs(sol.total_cost), 1e-300);
  a.objective_error = std::abs(recomputed - sol.total_cost) / scale;
  if (recomputed == sol.total_cost) a.objective_error = 0.0;
  return a;
}

std::string solution_csv(const Scenario& scenario, const JurSolution& sol,
                         const std::vector<int>* fallback_flags) {
  std::ostringstream out;
  out << "user_id,mu,serving_station,p,w,user_cost,delay,served_flag";
  if (fallback_flags) out << ",fallbacks";
  out << '\n';
  char buf[320];
  for (std::size_t i = 0; i < scenario.users.size(); ++i) {
    const User& u = scenario.users[i];
    const int mu = sol.association.mu[i];
    const double delay = delay_of(u, mu == 1, scenario.delay);
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%d", u.id, mu,
                  sol.association.serving[i], sol.user_p[i], sol.user_w[i], sol.user_cost[i], delay,
                  sol.served[i] ? 1 : 0);
    out << buf;
    if (fallback_flags) out << ',' << (*fallback_flags)[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace hetnet

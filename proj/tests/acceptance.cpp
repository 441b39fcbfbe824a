// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hetnet/config.hpp"
#include "hetnet/cro.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/harness.hpp"
#include "hetnet/io.hpp"
#include "hetnet/jur.hpp"
#include "hetnet/random.hpp"
#include "hetnet/svm.hpp"
#include "support.hpp"
#include "svm_oracle.hpp"

using namespace hetnet;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr int kJurScenarios = 50;
constexpr double kJurTol = 1e-9;
constexpr double kJurBudgetS = 60.0;
constexpr int kCroInstances = 30;
constexpr double kCroMatchTol = 1e-4;
constexpr double kKktTol = 1e-5;
constexpr double kSlackTol = 1e-6;  // times r_th
constexpr double kCroBudgetS = 30.0;
constexpr int kGradientPoints = 100;
constexpr double kGradientTol = 1e-5;
constexpr double kSvmConstraintTol = 1e-8;
constexpr double kSvmDualTol = 1e-4;
constexpr double kOffloadLo = 0.60, kOffloadHi = 0.90;
constexpr double kAgreementMin = 0.90;
constexpr double kCostBand = 0.10;
constexpr double kDsmRatioMax = 0.8;
constexpr double kTimeRatioMax = 0.2;
constexpr double kTrendBudgetS = 600.0;
constexpr int kRoundTripVectors = 1000;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s %d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// 1: branch-and-bound against enumeration.
void jur_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  int matched = 0;
  int both_infeasible = 0;
  double worst = 0.0;
  for (int t = 0; t < kJurScenarios; ++t) {
    const std::size_t n = 4 + rng.below(9);
    const std::size_t k = 1 + rng.below(3);
    Scenario sc = generate_scenario(testing::small_config(n, k), rng.next());
    sc.mbs.w_max = testing::coupled_bandwidth(sc, testing::all_users(sc), rng.uniform(0.05, 1.2));
    const BidTable bids = build_bid_table(sc);
    bool ex_inf = false;
    bool bb_inf = false;
    JurSolution ex, bb;
    try { ex = solve_jur_exhaustive(sc, bids); } catch (const InfeasibleError&) { ex_inf = true; }
    try { bb = solve_jur_bnb(sc, bids); } catch (const InfeasibleError&) { bb_inf = true; }
    if (ex_inf || bb_inf) {
      if (ex_inf && bb_inf) ++both_infeasible;
      continue;
    }
    const double d = rel(bb.total_cost, ex.total_cost);
    worst = std::max(worst, d);
    if (d <= kJurTol && bb.optimality == Optimality::Exact) ++matched;
  }
  const double elapsed = since(start);
  const bool ok = matched + both_infeasible == kJurScenarios && elapsed < kJurBudgetS;
  report(1, "JUR branch-and-bound equals enumeration", ok,
         fmt("%.0f/50 equal (%.0f both infeasible), max rel diff %.2e, %.1f s", matched + both_infeasible,
             both_infeasible, worst, elapsed));
}

// 2: barrier CRO against the separable reference.
void cro_correctness() {
  const auto start = Clock::now();
  Rng rng(202);
  int ok_count = 0;
  int redrawn = 0;
  int redrawn_agree = 0;
  double worst_cost = 0.0, worst_kkt = 0.0, worst_slack = 0.0, min_slack = HUGE_VAL;
  int done = 0;
  while (done < kCroInstances) {
    const std::size_t n = 2 + rng.below(14);
    Scenario sc = generate_scenario(testing::small_config(n, 0), rng.next());
    const auto users = testing::all_users(sc);
    const double frac = rng.uniform(0.4, 1.2);
    sc.mbs.w_max = frac * testing::uncoupled_demand(sc, users);
    const CroInstance inst = CroInstance::from_scenario(sc, users);
    if (!(testing::min_bandwidth_sum(sc, users) < sc.mbs.w_max)) {
      // No allocation exists; both solvers must say so.
      ++redrawn;
      bool a = false, b = false;
      try { solve_cro_reference(inst); } catch (const InfeasibleError&) { a = true; }
      try { solve_cro_barrier(inst); } catch (const InfeasibleError&) { b = true; }
      redrawn_agree += a && b ? 1 : 0;
      continue;
    }
    ++done;
    const CroSolution ref = solve_cro_reference(inst);
    const CroSolution bar = solve_cro_barrier(inst);
    const double d = rel(bar.total_cost, ref.total_cost);
    const double kkt = check_kkt(inst, bar, kKktTol).max_residual();
    double hi = 0.0, lo = HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& su = inst.served_users[i];
      const double g = reliability_slack(bar.p[static_cast<Eigen::Index>(i)],
                                         bar.w[static_cast<Eigen::Index>(i)], su.user, su.gain, su.n0) /
                       su.user.r_th;
      hi = std::max(hi, g);
      lo = std::min(lo, g);
    }
    worst_cost = std::max(worst_cost, d);
    worst_kkt = std::max(worst_kkt, kkt);
    worst_slack = std::max(worst_slack, hi);
    min_slack = std::min(min_slack, lo);
    if (d <= kCroMatchTol && kkt < kKktTol && lo >= 0.0 && hi <= kSlackTol) ++ok_count;
  }
  const double elapsed = since(start);
  const bool ok = ok_count == kCroInstances && redrawn_agree == redrawn && elapsed < kCroBudgetS;
  report(2, "CRO barrier matches reference with KKT", ok,
         fmt("%.0f/30 ok, max rel cost diff %.2e, max KKT residual %.2e, ", ok_count, worst_cost,
             worst_kkt) +
             fmt("slack/r_th in [%.2e, %.2e], ", min_slack, worst_slack) +
             fmt("%.0f infeasible draws rejected (%.0f agreed), %.1f s", redrawn, redrawn_agree,
                 elapsed));
}

// 3: analytic gradient against central differences.
void gradient_audit() {
  Rng rng(303);
  double worst = 0.0;
  int checked = 0;
  for (int t = 0; t < kGradientPoints; ++t) {
    const std::size_t n = 1 + rng.below(6);
    const Scenario sc = generate_scenario(testing::small_config(n, 0), rng.next());
    const CroInstance inst = CroInstance::from_scenario(sc, testing::all_users(sc));
    Eigen::VectorXd p(n), w(n), lambda(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& su = inst.served_users[i];
      const auto k = static_cast<Eigen::Index>(i);
      p[k] = sc.mbs.p_max * rng.uniform(0.01, 0.99);
      const double s = std::log2(1.0 + p[k] * su.gain * su.gain / su.n0);
      w[k] = min_rate_requirement(su.user) / s * rng.uniform(1.05, 3.0);
      lambda[k] = rng.uniform(1e-3, 2.0);
    }
    const double nu = rng.uniform(0.0, 2.0) * sc.mbs.bandwidth_cost();
    const LagrangianGradient g = penalized_lagrangian_gradient(inst, p, w, lambda, nu);
    auto audit = [&](Eigen::VectorXd& x, const Eigen::VectorXd& analytic) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double x0 = x[k];
        const double h = 1e-5 * std::abs(x0);
        x[k] = x0 + h;
        const double up = penalized_lagrangian(inst, p, w, lambda, nu);
        x[k] = x0 - h;
        const double down = penalized_lagrangian(inst, p, w, lambda, nu);
        x[k] = x0;
        worst = std::max(worst, rel(analytic[k], (up - down) / (2.0 * h)));
        ++checked;
      }
    };
    audit(p, g.dp);
    audit(w, g.dw);
    audit(lambda, g.dlambda);
  }
  report(3, "penalized Lagrangian gradient audit", worst <= kGradientTol,
         fmt("%.0f points, %.0f partials, max rel error %.2e", kGradientPoints, checked, worst));
}

// 4: SVM dual validity.
void svm_validity() {
  const TrainingSet toy = testing::two_blobs(20, 3.0, 404);
  SvmParams hard;
  hard.c = 100.0;
  hard.kernel_gamma = 0.5;
  const double toy_acc = accuracy(train(toy, hard), toy);

  const TrainingSet data = testing::two_blobs(200, 0.4, 405);
  SvmParams p;
  p.c = 1.0;
  p.kernel_gamma = 0.1;
  p.tol = 1e-5;
  const SvmModel m = train(data, p);
  double box = 0.0, eq = 0.0;
  for (double a : m.alphas) {
    box = std::max(box, std::max(0.0, std::abs(a) - p.c));
    eq += a;
  }
  const testing::DualOracle o = testing::solve_dual_pg(data, p.c, p.kernel_gamma, 20000);
  const double dual_gap = rel(dual_objective(m), o.objective);
  const bool ok = box <= kSvmConstraintTol && std::abs(eq) <= kSvmConstraintTol && toy_acc == 1.0 &&
                  dual_gap <= kSvmDualTol;
  report(4, "SVM dual validity", ok,
         fmt("box excess %.1e, |sum y a| %.1e, toy accuracy %.3f, ", box, std::abs(eq), toy_acc) +
             fmt("dual %.8g vs projected gradient %.8g (rel %.2e)", dual_objective(m), o.objective,
                 dual_gap));
}

// 5 and 6 share one pipeline run on the default configuration.
void trends(PipelineResult& out) {
  const auto start = Clock::now();
  const RunConfig config;
  const fs::path dir = fs::temp_directory_path() / "hetnet_acceptance_trend";
  fs::remove_all(dir);
  PipelineOpts opts;
  opts.run_sweep = true;
  out = run_pipeline(config, dir, opts);
  const double elapsed = since(start);
  const Comparison& c = out.comparison;

  if (!c.jur || !c.lhm || !c.dsm) {
    report(5, "default-scenario trends", false, "a solver failed on the default scenario");
  } else {
    const double n = static_cast<double>(out.scenario.users.size());
    const double off = static_cast<double>(c.jur->association.offloaded_count()) / n;
    const double agree = c.lhm->svm_agreement;
    const double cost_ratio = c.lhm->solution.total_cost / c.jur->total_cost;
    const double avg = c.dsm->total_cost / static_cast<double>(c.dsm->served_count());
    const double jur_avg = c.jur->total_cost / static_cast<double>(c.jur->served_count());
    const double lhm_avg = c.lhm->solution.total_cost / static_cast<double>(c.lhm->solution.served_count());
    const double time_ratio = c.lhm->solution.wall_time / c.jur->wall_time;
    const bool a = off >= kOffloadLo && off <= kOffloadHi;
    const bool b = agree >= kAgreementMin;
    const bool cc = std::abs(cost_ratio - 1.0) <= kCostBand;
    const bool d = jur_avg <= kDsmRatioMax * avg && lhm_avg <= kDsmRatioMax * avg;
    const bool e = time_ratio <= kTimeRatioMax;
    report(5, "default-scenario trends", a && b && cc && d && e && elapsed < kTrendBudgetS,
           fmt("(a) offload %.4f ", off) + (a ? "ok" : "out of band") +
               fmt("; (b) agreement %.4f ", agree) + (b ? "ok" : "low") +
               fmt("; (c) LHM/JUR cost %.4f ", cost_ratio) + (cc ? "ok" : "off") +
               fmt("; (d) JUR/DSM %.3f LHM/DSM %.3f ", jur_avg / avg, lhm_avg / avg) +
               (d ? "ok" : "high") +
               fmt("; (e) LHM/JUR time %.4f (%.3f s vs %.3f s) ", time_ratio,
                   c.lhm->solution.wall_time, c.jur->wall_time) +
               (e ? "ok" : "slow") + fmt("; pipeline %.1f s", elapsed));
  }

  // 6: DSM non-increasing, below 100% once saturated; JUR and LHM at 100%
  // wherever JUR is feasible (HetNet capacity).
  const auto& rows = out.sweep->rows;
  bool monotone = true, heterogeneous_full = true, saturates = false, full_before = false;
  double prev = HUGE_VAL;
  bool capacity_hit = false;
  std::string series;
  for (std::size_t n : config.sweep.n_grid) {
    double dsm = -1, jur = -1, lhm = -1;
    bool jur_failed = false;
    for (const auto& r : rows) {
      if (r.n_users != n) continue;
      if (r.algorithm == "DSM") dsm = r.failed ? 0.0 : r.service_rate;
      if (r.algorithm == "JUR") {
        jur = r.service_rate;
        jur_failed = r.failed;
      }
      if (r.algorithm == "LHM") lhm = r.failed ? 0.0 : r.service_rate;
    }
    if (dsm > prev) monotone = false;
    prev = dsm;
    if (dsm >= 1.0) full_before = true;
    if (dsm < 1.0 && full_before) saturates = true;
    if (jur_failed) capacity_hit = true;
    if (!capacity_hit && (jur < 1.0 || lhm < 1.0)) heterogeneous_full = false;
    series += fmt("%.0f:%.3f/%.3f/%.3f ", static_cast<double>(n), dsm, jur, lhm);
  }
  report(6, "service-rate sweep", monotone && saturates && heterogeneous_full,
         std::string(monotone ? "DSM non-increasing" : "DSM increases somewhere") +
             (saturates ? ", saturates in grid" : ", never saturates") +
             (heterogeneous_full ? ", JUR/LHM full" : ", JUR/LHM lose users") +
             " [n:DSM/JUR/LHM " + series + "]");
  fs::remove_all(dir);
}

// 7: two full runs, same master seed, byte-identical outputs.
void determinism() {
  RunConfig config;
  config.seed = 7;
  const fs::path a = fs::temp_directory_path() / "hetnet_acceptance_det_a";
  const fs::path b = fs::temp_directory_path() / "hetnet_acceptance_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  PipelineOpts opts;
  opts.mask_timing = true;
  const PipelineResult ra = run_pipeline(config, a, opts);
  const PipelineResult rb = run_pipeline(config, b, opts);
  bool same = ra.files.size() == rb.files.size();
  std::size_t compared = 0;
  for (std::size_t k = 0; same && k < ra.files.size(); ++k) {
    same = ra.files[k].name == rb.files[k].name && ra.files[k].hash == rb.files[k].hash &&
           read_file(a / ra.files[k].name) == read_file(b / rb.files[k].name);
    ++compared;
  }
  report(7, "determinism", same,
         fmt("%.0f files compared byte for byte, manifest hash ", static_cast<double>(compared)) +
             content_hash(read_file(a / "manifest.json")));
  fs::remove_all(a);
  fs::remove_all(b);
}

// 8: scenario and model JSON round trips.
void round_trips(const PipelineResult& run) {
  const std::string sc_text = scenario_to_json(run.scenario);
  const Scenario sc_back = scenario_from_json(sc_text);
  bool sc_same = scenario_to_json(sc_back) == sc_text && sc_back.users.size() == run.scenario.users.size();
  for (std::size_t i = 0; sc_same && i < sc_back.users.size(); ++i) {
    const User& x = sc_back.users[i];
    const User& y = run.scenario.users[i];
    sc_same = x.position == y.position && x.r_th == y.r_th && x.d_th == y.d_th &&
              x.delta_r == y.delta_r && x.delta_d == y.delta_d && x.mean_gain == y.mean_gain &&
              x.mean_noise == y.mean_noise;
  }
  const std::string m_text = model_to_json(run.model);
  const SvmModel m_back = model_from_json(m_text);
  const bool m_same = model_to_json(m_back) == m_text && m_back.alphas == run.model.alphas &&
                      m_back.bias == run.model.bias;
  Rng rng(808);
  int identical = 0;
  for (int t = 0; t < kRoundTripVectors; ++t) {
    const User& u = run.scenario.users[rng.below(run.scenario.users.size())];
    FeatureVector x = features_of(u, run.scenario);
    for (int k = 0; k < 6; ++k) x[k] *= rng.uniform(0.5, 1.5);
    const double d1 = decision_value(run.model, x);
    const double d2 = decision_value(m_back, x);
    identical += (d1 == d2 && predict(run.model, x) == predict(m_back, x)) ? 1 : 0;
  }
  report(8, "serialization round trips", sc_same && m_same && identical == kRoundTripVectors,
         std::string("scenario ") + (sc_same ? "identical" : "differs") + ", model " +
             (m_same ? "identical" : "differs") +
             fmt(", %.0f/1000 predictions bit-identical", identical));
}

}  // namespace

int main() {
  jur_oracle();
  cro_correctness();
  gradient_audit();
  svm_validity();
  PipelineResult run;
  trends(run);
  determinism();
  round_trips(run);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

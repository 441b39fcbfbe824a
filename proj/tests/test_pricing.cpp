#include <gtest/gtest.h>

#include <cmath>

#include "hetnet/link.hpp"
#include "hetnet/pricing.hpp"
#include "hetnet/random.hpp"
#include "support.hpp"

namespace hetnet {
namespace {

// Dense grid over p in log space; w follows from the rate curve.
double grid_min_cost(const User& u, const StationParams& st, double gain) {
  const double k = gain * gain / u.mean_noise;
  const double rate = min_rate_requirement(u);
  double best = HUGE_VAL;
  const double lo = std::log(st.p_max) - 30.0;
  const double hi = std::log(st.p_max);
  for (int t = 0; t <= 2000; ++t) {
    const double p = std::exp(lo + (hi - lo) * t / 2000.0);
    const double w = rate / std::log2(1.0 + p * k);
    best = std::min(best, st.c_p * p + st.gamma * st.c_w * w);
  }
  return best;
}

TEST(PerUserMinCost, MatchesGridOracle) {
  const Scenario sc = generate_scenario(default_scenario_config(), 4);
  for (std::size_t i = 0; i < 60; ++i) {
    const User& u = sc.users[i];
    const auto rc = per_user_min_cost(u, sc.mbs, u.gain_to(kMbsId), u.mean_noise);
    ASSERT_TRUE(rc);
    const double grid = grid_min_cost(u, sc.mbs, u.gain_to(kMbsId));
    EXPECT_LE(rc->cost, grid * (1.0 + 1e-9)) << "user " << i;
    EXPECT_GE(rc->cost, grid * (1.0 - 1e-3)) << "user " << i;
    EXPECT_GE(testing::shannon_rate(rc->p, rc->w, u.gain_to(kMbsId), u.mean_noise),
              min_rate_requirement(u) * (1.0 - 1e-12));
    EXPECT_LE(rc->p, sc.mbs.p_max);
  }
}

TEST(PerUserMinCost, MatchesTernaryOracle) {
  const Scenario sc = generate_scenario(default_scenario_config(), 5);
  for (std::size_t i = 0; i < 40; ++i) {
    const User& u = sc.users[i];
    const double g = u.gain_to(kMbsId);
    const auto rc = per_user_min_cost(u, sc.mbs, g, u.mean_noise);
    const auto o = testing::oracle_link(min_rate_requirement(u), g * g / u.mean_noise,
                                        sc.mbs.p_max, sc.mbs.c_p, sc.mbs.bandwidth_cost(), 0.0);
    EXPECT_NEAR(rc->cost, o.cost, 1e-8 * o.cost);
  }
}

TEST(PerUserMinCost, PowerCapBindsForWeakLinks) {
  User u;
  u.r_th = 1e6;
  u.delta_r = 0.0;
  u.mean_noise = 1.0;
  StationParams st;
  st.p_max = 1.0;
  st.c_p = 1.0;
  st.c_w = 1e-3;  // bandwidth dear: wants high power
  const auto rc = per_user_min_cost(u, st, 1e-3, 1.0);
  ASSERT_TRUE(rc);
  EXPECT_DOUBLE_EQ(rc->p, 1.0);
}

TEST(PerUserMinCost, DeadLinkHasNoCost) {
  User u;
  u.r_th = 1e6;
  u.mean_noise = 1.0;
  StationParams st;
  st.p_max = 1.0;
  st.c_p = 1.0;
  st.c_w = 1e-6;
  EXPECT_FALSE(per_user_min_cost(u, st, 0.0, 1.0));
}

TEST(LinkCost, ConvexInSpectralEfficiency) {
  Rng rng(9);
  LinkCostModel m;
  m.rate = 3e6;
  m.snr_per_watt = 1e3;
  m.p_max = 100;
  m.c_p = 1.0;
  m.bandwidth_cost = 1e-5;
  const double smax = m.s_max();
  for (int t = 0; t < 500; ++t) {
    const double a = smax * (0.01 + 0.99 * rng.uniform());
    const double b = smax * (0.01 + 0.99 * rng.uniform());
    const double mid = link_cost_at(m, 0.5 * (a + b));
    EXPECT_LE(mid, 0.5 * (link_cost_at(m, a) + link_cost_at(m, b)) * (1.0 + 1e-12));
  }
}

TEST(LinkCost, AllocationMeetsRate) {
  LinkCostModel m;
  m.rate = 7.3e6;
  m.snr_per_watt = 47.0;
  m.p_max = 100;
  m.c_p = 1.0;
  m.bandwidth_cost = 1e-5;
  for (double s : {0.1, 1.0, 3.3, m.s_max()}) {
    const LinkAllocation a = link_allocation_at(m, s);
    EXPECT_GE(a.w * std::log2(1.0 + a.p * m.snr_per_watt), m.rate);
    EXPECT_LE(a.p, m.p_max);
  }
}

TEST(Bids, RewardIsMarkupOnResourceCost) {
  const Scenario sc = generate_scenario(default_scenario_config(), 6);
  const BidTable t = build_bid_table(sc);
  int covered = 0;
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    for (const Bid& b : t.bids[i]) {
      EXPECT_NEAR(b.reward, sc.sbss[0].reward_markup * b.resource_cost, 1e-12 * b.total);
      EXPECT_DOUBLE_EQ(b.total, b.resource_cost + b.reward);
      EXPECT_TRUE(sc.station(b.sbs_id).covers(sc.users[i].position));
    }
    if (!t.bids[i].empty()) {
      ++covered;
      const Bid* best = t.best_bid(i);
      for (const Bid& b : t.bids[i]) EXPECT_LE(best->total, b.total);
    } else {
      EXPECT_EQ(t.best_bid(i), nullptr);
    }
  }
  EXPECT_GT(covered, 0);
}

TEST(Bids, NoBidOutsideCoverage) {
  const Scenario sc = generate_scenario(testing::small_config(40, 1), 3);
  for (const User& u : sc.users) {
    const auto b = compute_bid(sc.sbss[0], u);
    EXPECT_EQ(b.has_value(), sc.sbss[0].covers(u.position));
  }
}

TEST(Bids, TiesGoToLowestSbsId) {
  std::vector<Bid> bids(3);
  bids[0].sbs_id = 5;
  bids[0].total = 2.0;
  bids[1].sbs_id = 2;
  bids[1].total = 2.0;
  bids[2].sbs_id = 3;
  bids[2].total = 3.0;
  EXPECT_EQ(select_best_bid(bids), 1);
  EXPECT_EQ(select_best_bid({}), -1);
}

TEST(Bids, CsvHasHeaderAndOneRowPerBid) {
  const Scenario sc = generate_scenario(testing::small_config(30, 3), 8);
  const BidTable t = build_bid_table(sc);
  const std::string csv = bid_table_csv(t);
  std::size_t rows = 0;
  for (const auto& v : t.bids) rows += v.size();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), rows + 1);
  EXPECT_EQ(csv.rfind("user_id,sbs_id,p,w,resource_cost,reward,total,is_best\n", 0), 0u);
}

}  // namespace
}  // namespace hetnet

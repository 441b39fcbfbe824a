#include <gtest/gtest.h>

#include "hetnet/errors.hpp"
#include "hetnet/lhm.hpp"
#include "support.hpp"

namespace hetnet {
namespace {

Scenario coupled(std::size_t n, std::size_t k, std::uint64_t seed, double frac) {
  Scenario sc = generate_scenario(testing::small_config(n, k), seed);
  sc.mbs.w_max = testing::coupled_bandwidth(sc, testing::all_users(sc), frac);
  return sc;
}

TEST(Lhm, JurLabelsReproduceJurCost) {
  const Scenario sc = coupled(40, 4, 3, 0.5);
  const BidTable bids = build_bid_table(sc);
  const JurSolution jur = solve_jur_bnb(sc, bids);
  const LhmSolution lhm = solve_lhm_with_predictions(sc, jur.association.mu, bids);
  EXPECT_EQ(lhm.fallbacks, 0);
  EXPECT_EQ(lhm.solution.association.mu, jur.association.mu);
  EXPECT_NEAR(lhm.solution.total_cost, jur.total_cost, 1e-4 * jur.total_cost);
  EXPECT_TRUE(audit_solution(sc, bids, lhm.solution).passed(1e-6));
}

TEST(Lhm, RepairPinsUsersWithoutBids) {
  const Scenario sc = generate_scenario(testing::small_config(30, 2), 5);
  const BidTable bids = build_bid_table(sc);
  const LhmSolution lhm =
      solve_lhm_with_predictions(sc, std::vector<int>(sc.users.size(), 0), bids);
  int expected = 0;
  for (std::size_t i = 0; i < sc.users.size(); ++i) {
    const bool no_bid = bids.best_bid(i) == nullptr;
    expected += no_bid ? 1 : 0;
    EXPECT_EQ(lhm.fallback_flags[i], no_bid ? 1 : 0);
    EXPECT_EQ(lhm.solution.association.mu[i], no_bid ? 1 : 0);
    EXPECT_EQ(lhm.predicted_mu[i], 0);
  }
  EXPECT_EQ(lhm.fallbacks, expected);

  LhmOpts strict;
  strict.repair = false;
  if (expected > 0) {
    EXPECT_THROW(solve_lhm_with_predictions(sc, std::vector<int>(sc.users.size(), 0), bids, strict),
                 InfeasibleError);
  }
}

TEST(Lhm, RepairMovesCheapestBidOffExhaustedMbs) {
  Scenario sc = generate_scenario(testing::small_config(30, 4), 8);
  const auto all = testing::all_users(sc);
  sc.mbs.w_max = 0.7 * testing::min_bandwidth_sum(sc, all);
  const BidTable bids = build_bid_table(sc);
  const LhmSolution lhm = solve_lhm_with_predictions(sc, std::vector<int>(30, 1), bids);
  EXPECT_GT(lhm.fallbacks, 0);
  EXPECT_TRUE(audit_solution(sc, bids, lhm.solution).passed(1e-6));
  for (std::size_t i = 0; i < 30; ++i) {
    if (lhm.solution.association.mu[i] == 0) {
      EXPECT_EQ(lhm.fallback_flags[i], 1);
    }
  }
  LhmOpts strict;
  strict.repair = false;
  EXPECT_THROW(solve_lhm_with_predictions(sc, std::vector<int>(30, 1), bids, strict),
               InfeasibleError);
}

TEST(Lhm, WrongPredictionCountIsRejected) {
  const Scenario sc = generate_scenario(testing::small_config(5, 1), 1);
  EXPECT_THROW(solve_lhm_with_predictions(sc, {1, 1}, build_bid_table(sc)), ConfigError);
}

TEST(Lhm, TrainingDataHasOneRowPerUser) {
  std::vector<Scenario> scs;
  for (std::uint64_t s = 1; s <= 3; ++s) scs.push_back(coupled(15, 3, s, 0.6));
  int skipped = -1;
  const TrainingSet d = build_training_data(scs, {}, &skipped);
  EXPECT_EQ(skipped, 0);
  ASSERT_EQ(d.size(), 45u);
  const JurSolution jur = solve_jur_bnb(scs[1], build_bid_table(scs[1]));
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(d.y[15 + i], label_of_mu(jur.association.mu[i]));
    EXPECT_EQ(d.x[15 + i], features_of(scs[1].users[i], scs[1]));
  }
}

TEST(Lhm, TrainedModelEndToEnd) {
  std::vector<Scenario> scs;
  for (std::uint64_t s = 1; s <= 4; ++s) scs.push_back(coupled(40, 4, 100 + s, 0.8));
  const SvmModel m = train(build_training_data(scs), {});
  const Scenario test = coupled(40, 4, 7, 0.8);
  const BidTable bids = build_bid_table(test);
  const LhmSolution lhm = solve_lhm(test, m, bids);
  EXPECT_TRUE(audit_solution(test, bids, lhm.solution).passed(1e-6));
  EXPECT_EQ(lhm.solution.service_rate(), 1.0);
  EXPECT_GE(lhm.solution.wall_time, 0.0);
}

TEST(Lhm, AgreementCountsEqualEntries) {
  Association a{{1, 0, 1, 1}, {}};
  Association b{{1, 1, 1, 0}, {}};
  EXPECT_DOUBLE_EQ(association_agreement(a, b), 0.5);
  Association c{{1}, {}};
  EXPECT_THROW(association_agreement(a, c), ConfigError);
}

}  // namespace
}  // namespace hetnet

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hetnet/link.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

/// An SBS's offer to serve one user: resource cost plus reward.
struct Bid {
  StationId sbs_id = 0;
  UserId user_id = 0;
  double resource_cost = 0.0;
  double reward = 0.0;
  double total = 0.0;
  double p = 0.0;
  double w = 0.0;
};

/// Valid bids per user (indexed like Scenario::users) and the position of the
/// cheapest one, or -1 when nobody bid.
struct BidTable {
  std::vector<std::vector<Bid>> bids;
  std::vector<int> best;

  const Bid* best_bid(std::size_t user_index) const {
    const int b = best[user_index];
    return b < 0 ? nullptr : &bids[user_index][static_cast<std::size_t>(b)];
  }
};

/// r_th (1 - delta_r): the Markov-relaxed expected-rate floor.
inline double min_rate_requirement(const User& user) {
  return user.r_th * (1.0 - user.delta_r);
}

struct ResourceCost {
  double p = 0.0;
  double w = 0.0;
  double cost = 0.0;
};

LinkCostModel link_model(const User& user, const StationParams& station, double gain,
                         double n0, double bandwidth_price = 0.0);

/// Cheapest (p, w) meeting the user's reliability floor at one station, or
/// nullopt when the link cannot carry any rate.
std::optional<ResourceCost> per_user_min_cost(const User& user, const StationParams& station,
                                              double gain, double n0);

std::optional<Bid> compute_bid(const StationParams& sbs, const User& user);

/// Index of the minimum-total bid; ties go to the lowest sbs_id. -1 if empty.
int select_best_bid(const std::vector<Bid>& bids);

BidTable build_bid_table(const Scenario& scenario);

/// CSV: user_id,sbs_id,p,w,resource_cost,reward,total,is_best
std::string bid_table_csv(const BidTable& table);

}  // namespace hetnet

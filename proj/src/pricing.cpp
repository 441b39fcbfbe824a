#include "hetnet/pricing.hpp"

#include <cstdio>
#include <sstream>

#include "hetnet/parallel.hpp"

namespace hetnet {

LinkCostModel link_model(const User& user, const StationParams& station, double gain,
                         double n0, double bandwidth_price) {
  LinkCostModel m;
  m.rate = min_rate_requirement(user);
  m.snr_per_watt = gain * gain / n0;
  m.p_max = station.p_max;
  m.c_p = station.c_p;
  m.bandwidth_cost = station.bandwidth_cost();
  m.bandwidth_price = bandwidth_price;
  return m;
}

std::optional<ResourceCost> per_user_min_cost(const User& user, const StationParams& station,
                                              double gain, double n0) {
  const LinkCostModel m = link_model(user, station, gain, n0);
  if (!m.feasible()) return std::nullopt;
  const LinkAllocation a = minimize_link_cost(m);
  return ResourceCost{a.p, a.w, a.cost};
}

std::optional<Bid> compute_bid(const StationParams& sbs, const User& user) {
  if (!sbs.covers(user.position)) return std::nullopt;
  const double gain = user.gain_to(sbs.id);
  if (!(gain > 0.0)) return std::nullopt;
  const auto rc = per_user_min_cost(user, sbs, gain, user.mean_noise);
  if (!rc) return std::nullopt;
  Bid b;
  b.sbs_id = sbs.id;
  b.user_id = user.id;
  b.resource_cost = rc->cost;
  b.reward = sbs.reward_markup * rc->cost;
  b.total = b.resource_cost + b.reward;
  b.p = rc->p;
  b.w = rc->w;
  return b;
}

int select_best_bid(const std::vector<Bid>& bids) {
  int best = -1;
  for (std::size_t k = 0; k < bids.size(); ++k) {
    if (best < 0) {
      best = static_cast<int>(k);
      continue;
    }
    const Bid& cur = bids[static_cast<std::size_t>(best)];
    if (bids[k].total < cur.total ||
        (bids[k].total == cur.total && bids[k].sbs_id < cur.sbs_id)) {
      best = static_cast<int>(k);
    }
  }
  return best;
}

BidTable build_bid_table(const Scenario& scenario) {
  const std::size_t n = scenario.users.size();
  BidTable table;
  table.bids.resize(n);
  table.best.assign(n, -1);
  parallel_for(n, [&](std::size_t i) {
    for (const auto& sbs : scenario.sbss) {
      if (auto bid = compute_bid(sbs, scenario.users[i])) table.bids[i].push_back(*bid);
    }
    table.best[i] = select_best_bid(table.bids[i]);
  });
  return table;
}

std::string bid_table_csv(const BidTable& table) {
  std::ostringstream out;
  out << "user_id,sbs_id,p,w,resource_cost,reward,total,is_best\n";
  char buf[256];
  for (std::size_t i = 0; i < table.bids.size(); ++i) {
    for (std::size_t k = 0; k < table.bids[i].size(); ++k) {
      const Bid& b = table.bids[i][k];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", b.user_id,
                    b.sbs_id, b.p, b.w, b.resource_cost, b.reward, b.total,
                    static_cast<int>(k) == table.best[i] ? 1 : 0);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace hetnet

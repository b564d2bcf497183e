#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rolesim/block_builder.hpp"
#include "rolesim/rng.hpp"

namespace rolesim {

struct AuctionOutcome {
  AgentIndex winner = 0;
  Block winning_block;
  double payment = 0.0;  ///< second-highest truthful bid, 0 with a single bidder
  std::vector<std::pair<AgentIndex, double>> bids;  ///< builder -> truthful bid, input order
};

struct Settlement {
  std::vector<double> payoffs;  ///< indexed by agent
  double proposer = 0.0;

  double total() const;
};

/// Sealed-bid second-price auction where every builder bids the total value
/// its block captures. Exact ties at the top are broken uniformly at random
/// (the rng is only consumed on a tie). Returns nullopt when no builder bids.
std::optional<AuctionOutcome> run_auction(std::span<const Block> blocks, Rng& rng);

/// Splits the winning block's value between its searchers, the winning
/// builder and the proposer.
///  - included searcher i keeps (v_i - bid_i) plus a pro-rata share
///    bid_i / sum(searcher bids) of rebate * surplus, surplus = total bids - payment;
///  - the winning builder keeps (1 - rebate) * surplus;
///  - the proposer receives the payment.
/// With no searcher bundle in the block the rebate has no recipient and the
/// builder keeps the whole surplus. If searchers are included but all bid 0,
/// the rebate is split evenly among them.
/// Everyone else gets 0; without an outcome every payoff is 0.
Settlement settle(const std::optional<AuctionOutcome>& outcome, std::size_t n_agents,
                  double winner_rebate);

/// |sum of all payoffs - value of the winning block|; 0 up to rounding.
double conservation_residual(const std::optional<AuctionOutcome>& outcome,
                             const Settlement& settlement);

}  // namespace rolesim

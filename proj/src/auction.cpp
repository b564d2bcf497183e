#include "rolesim/auction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rolesim {

double Settlement::total() const {
  double sum = proposer;
  for (double p : payoffs) sum += p;
  return sum;
}

std::optional<AuctionOutcome> run_auction(std::span<const Block> blocks, Rng& rng) {
  if (blocks.empty()) return std::nullopt;

  AuctionOutcome out;
  out.bids.reserve(blocks.size());
  double best = -1.0;
  for (const auto& b : blocks) {
    const double bid = b.total_bids();
    out.bids.emplace_back(b.builder, bid);
    best = std::max(best, bid);
  }

  std::vector<std::size_t> top;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (out.bids[i].second == best) top.push_back(i);
  const std::size_t pick = top.size() == 1 ? top.front() : top[rng.index(top.size())];

  double second = 0.0;
  if (blocks.size() > 1) {
    if (top.size() > 1) {
      second = best;
    } else {
      for (std::size_t i = 0; i < blocks.size(); ++i)
        if (i != pick) second = std::max(second, out.bids[i].second);
    }
  }

  out.winner = blocks[pick].builder;
  out.winning_block = blocks[pick];
  out.payment = second;
  return out;
}

Settlement settle(const std::optional<AuctionOutcome>& outcome, std::size_t n_agents,
                  double winner_rebate) {
  Settlement s;
  s.payoffs.assign(n_agents, 0.0);
  if (!outcome) return s;
  if (!(winner_rebate >= 0.0 && winner_rebate <= 1.0))
    throw std::invalid_argument("rebate ratio must lie in [0, 1]");

  const auto& block = outcome->winning_block;
  const AgentIndex builder = outcome->winner;
  if (builder >= n_agents) throw std::out_of_range("winner outside the agent range");

  const double surplus = std::max(0.0, block.total_bids() - outcome->payment);
  double searcher_bids = 0.0;
  std::size_t searchers = 0;
  for (const auto& e : block.entries) {
    if (e.bundle == builder) continue;
    if (e.bundle >= n_agents) throw std::out_of_range("bundle owner outside the agent range");
    searcher_bids += e.bid;
    ++searchers;
  }

  const double rebate_pool = searchers > 0 ? winner_rebate * surplus : 0.0;
  for (const auto& e : block.entries) {
    if (e.bundle == builder) continue;
    const double share = searcher_bids > 0.0 ? e.bid / searcher_bids
                                             : 1.0 / static_cast<double>(searchers);
    s.payoffs[e.bundle] = (e.effective_value - e.bid) + share * rebate_pool;
  }
  s.payoffs[builder] = surplus - rebate_pool;
  s.proposer = outcome->payment;
  return s;
}

double conservation_residual(const std::optional<AuctionOutcome>& outcome,
                             const Settlement& settlement) {
  const double captured = outcome ? outcome->winning_block.total_value() : 0.0;
  return std::abs(settlement.total() - captured);
}

}  // namespace rolesim

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "rolesim/market.hpp"

namespace rolesim {

inline constexpr std::size_t kUnboundedCapacity = std::numeric_limits<std::size_t>::max();

/// A bundle offered to a builder. The bid is always bid_ratio times the
/// current effective value, so it falls together with the value when an
/// earlier bundle conflicts with it. The builder's own bundle uses ratio 1.
struct PendingBundle {
  AgentIndex id = 0;  ///< bundle id == owning agent
  double effective_value = 0.0;
  double bid_ratio = 1.0;

  double bid() const { return bid_ratio * effective_value; }
};

struct BlockEntry {
  AgentIndex bundle = 0;
  double effective_value = 0.0;  ///< value at inclusion, always > 0
  double bid = 0.0;              ///< amount paid to the builder
};

struct Block {
  AgentIndex builder = 0;
  std::vector<BlockEntry> entries;  ///< execution order
  std::size_t capacity = kUnboundedCapacity;

  double total_bids() const;
  double total_value() const;
  bool contains(AgentIndex bundle) const;
};

/// Greedy merge: repeatedly take the pending bundle with positive effective
/// value and the highest bid (lower id on ties), stop if its value is not
/// positive, otherwise append it and apply its interaction to everything
/// still pending. Runs until capacity or the pending list is exhausted.
Block build_block(AgentIndex builder, std::vector<PendingBundle> pending,
                  const InteractionGraph& graph, std::size_t capacity = kUnboundedCapacity);

}  // namespace rolesim

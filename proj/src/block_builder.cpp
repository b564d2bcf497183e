#include "rolesim/block_builder.hpp"

#include <algorithm>
#include <stdexcept>

namespace rolesim {

double Block::total_bids() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.bid;
  return sum;
}

double Block::total_value() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.effective_value;
  return sum;
}

bool Block::contains(AgentIndex bundle) const {
  return std::any_of(entries.begin(), entries.end(),
                     [bundle](const BlockEntry& e) { return e.bundle == bundle; });
}

namespace {

// True when a should execute before b.
bool ranks_before(const PendingBundle& a, const PendingBundle& b) {
  const bool a_live = a.effective_value > 0.0;
  const bool b_live = b.effective_value > 0.0;
  if (a_live != b_live) return a_live;
  const double bid_a = a.bid();
  const double bid_b = b.bid();
  if (bid_a != bid_b) return bid_a > bid_b;
  return a.id < b.id;
}

}  // namespace

Block build_block(AgentIndex builder, std::vector<PendingBundle> pending,
                  const InteractionGraph& graph, std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("block capacity must be at least 1");
  for (const auto& p : pending) {
    if (p.id >= graph.size()) throw std::out_of_range("pending bundle id outside the graph");
    if (!(p.bid_ratio >= 0.0 && p.bid_ratio <= 1.0))
      throw std::invalid_argument("bid ratio must lie in [0, 1]");
  }

  Block block;
  block.builder = builder;
  block.capacity = capacity;

  while (block.entries.size() < capacity && !pending.empty()) {
    auto head = std::min_element(pending.begin(), pending.end(), ranks_before);
    const PendingBundle chosen = *head;
    pending.erase(head);
    for (auto& p : pending)
      p.effective_value = apply_interaction(p.effective_value, graph.weight(p.id, chosen.id));
    if (!(chosen.effective_value > 0.0)) break;
    block.entries.push_back({chosen.id, chosen.effective_value, chosen.bid()});
  }
  return block;
}

}  // namespace rolesim

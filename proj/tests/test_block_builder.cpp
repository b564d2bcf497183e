#include <doctest.h>

#include "oracles.hpp"
#include "rolesim/block_builder.hpp"
#include "rolesim/rng.hpp"

using namespace rolesim;

namespace {

struct Instance {
  std::vector<PendingBundle> pending;
  InteractionGraph graph;
  std::size_t capacity;
};

// Random instance; with two_point the weights are in {-1, 0}, otherwise
// arbitrary values in [-1, 0.5].
Instance random_instance(Rng& rng, std::size_t n, bool two_point) {
  Instance in{{}, InteractionGraph(n), kUnboundedCapacity};
  for (std::size_t i = 0; i < n; ++i)
    in.pending.push_back({i, rng.exponential(10.0), i == 0 ? 1.0 : rng.uniform()});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      if (two_point) {
        if (rng.bernoulli(0.5)) in.graph.set_symmetric(i, k, -1.0);
      } else {
        in.graph.set_weight(i, k, -1.0 + 1.5 * rng.uniform());
        in.graph.set_weight(k, i, -1.0 + 1.5 * rng.uniform());
      }
    }
  if (rng.bernoulli(0.3)) in.capacity = 1 + rng.index(n);
  return in;
}

}  // namespace

TEST_CASE("independent bundles are ordered by bid") {
  InteractionGraph g(2);
  const auto block = build_block(0, {{0, 0.5, 0.8}, {1, 0.3, 1.0}}, g, 2);
  REQUIRE(block.entries.size() == 2);
  CHECK(block.entries[0].bundle == 0);
  CHECK(block.entries[1].bundle == 1);
  CHECK(block.total_bids() == doctest::Approx(0.7));
}

TEST_CASE("a conflicting bundle is dropped once its value reaches zero") {
  InteractionGraph g(2);
  g.set_symmetric(0, 1, -1.0);
  const auto block = build_block(0, {{0, 0.5, 0.8}, {1, 0.3, 1.0}}, g, 2);
  REQUIRE(block.entries.size() == 1);
  CHECK(block.entries[0].bundle == 0);
  CHECK(block.total_bids() == doctest::Approx(0.4));
}

TEST_CASE("empty input gives an empty block") {
  const auto block = build_block(3, {}, InteractionGraph(4));
  CHECK(block.entries.empty());
  CHECK(block.builder == 3);
  CHECK(block.total_bids() == 0.0);
}

TEST_CASE("equal bids go to the lower id") {
  InteractionGraph g(3);
  const auto block = build_block(0, {{2, 0.2, 1.0}, {1, 0.4, 0.5}, {0, 0.1, 1.0}}, g);
  REQUIRE(block.entries.size() == 3);
  CHECK(block.entries[0].bundle == 1);
  CHECK(block.entries[1].bundle == 2);
  CHECK(block.entries[2].bundle == 0);
}

TEST_CASE("capacity bounds the block") {
  InteractionGraph g(4);
  std::vector<PendingBundle> p = {{0, 0.4, 1}, {1, 0.3, 1}, {2, 0.2, 1}, {3, 0.1, 1}};
  CHECK(build_block(0, p, g, 2).entries.size() == 2);
  CHECK(build_block(0, p, g, 1).entries.front().bundle == 0);
}

TEST_CASE("greedy never beats the exhaustive optimum and entries are positive") {
  Rng rng(2024);
  for (int t = 0; t < 400; ++t) {
    const auto in = random_instance(rng, 1 + rng.index(6), t % 2 == 0);
    const auto block = build_block(0, in.pending, in.graph, in.capacity);
    CHECK(block.entries.size() <= std::min(in.capacity, in.pending.size()));
    std::vector<std::size_t> order;
    for (const auto& e : block.entries) {
      CHECK(e.effective_value > 0.0);
      order.push_back(e.bundle);  // ids equal positions in these instances
    }
    const double greedy = block.total_value();
    CHECK(greedy == doctest::Approx(oracle::sequence_value(in.pending, order, in.graph)));
    CHECK(greedy <= oracle::best_block_value(in.pending, in.graph, in.capacity) + 1e-12);
  }
}

TEST_CASE("greedy matches the sort-pop-update reference trace") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const auto in = random_instance(rng, 1 + rng.index(8), t % 3 != 0);
    const auto block = build_block(0, in.pending, in.graph, in.capacity);
    const auto trace = oracle::greedy_trace(in.pending, in.graph, in.capacity);
    REQUIRE(block.entries.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      CHECK(block.entries[i].bundle == trace[i].id);
      CHECK(block.entries[i].effective_value == doctest::Approx(trace[i].value).epsilon(1e-14));
      CHECK(block.entries[i].bid == doctest::Approx(trace[i].bid).epsilon(1e-14));
    }
  }
}

TEST_CASE("two-point effective values are either zero or the base value") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto in = random_instance(rng, 2 + rng.index(7), true);
    const auto block = build_block(0, in.pending, in.graph);
    for (const auto& e : block.entries) CHECK(e.effective_value == in.pending[e.bundle].effective_value);
  }
}

TEST_CASE("without conflicts every positive bundle is included by bid") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.index(9);
    std::vector<PendingBundle> p;
    for (std::size_t i = 0; i < n; ++i) p.push_back({i, rng.exponential(10.0), rng.uniform()});
    const auto block = build_block(0, p, InteractionGraph(n));
    REQUIRE(block.entries.size() == n);
    for (std::size_t i = 1; i < n; ++i) CHECK(block.entries[i - 1].bid >= block.entries[i].bid);
  }
}

TEST_CASE("identical inputs give identical blocks") {
  Rng rng(8);
  const auto in = random_instance(rng, 6, true);
  const auto a = build_block(1, in.pending, in.graph);
  const auto b = build_block(1, in.pending, in.graph);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].bundle == b.entries[i].bundle);
    CHECK(a.entries[i].bid == b.entries[i].bid);
  }
}

TEST_CASE("build_block validates its input") {
  InteractionGraph g(2);
  CHECK_THROWS(build_block(0, {{5, 0.1, 1.0}}, g));
  CHECK_THROWS(build_block(0, {{0, 0.1, 1.5}}, g));
  CHECK_THROWS(build_block(0, {{0, 0.1, 1.0}}, g, 0));
}

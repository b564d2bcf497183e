#include <doctest.h>

#include "rolesim/auction.hpp"
#include "rolesim/rng.hpp"

using namespace rolesim;

namespace {

// Block for `builder` whose truthful bid is `total` (a single own bundle).
Block block_worth(AgentIndex builder, double total) {
  Block b;
  b.builder = builder;
  if (total > 0.0) b.entries.push_back({builder, total, total});
  return b;
}

// Builder 0 (own value 0.2) plus searcher 1 (value 0.1, bid ratio 0.5).
AuctionOutcome one_builder_one_searcher() {
  Block b;
  b.builder = 0;
  b.entries = {{0, 0.2, 0.2}, {1, 0.1, 0.05}};
  AuctionOutcome out;
  out.winner = 0;
  out.winning_block = b;
  out.payment = 0.0;
  out.bids = {{0, 0.25}};
  return out;
}

}  // namespace

TEST_CASE("second price with three bidders") {
  Rng rng(1);
  const std::vector<Block> blocks = {block_worth(0, 5), block_worth(1, 3), block_worth(2, 1)};
  const auto out = run_auction(blocks, rng);
  REQUIRE(out);
  CHECK(out->winner == 0);
  CHECK(out->payment == 3.0);
  const auto s = settle(out, 3, 0.0);
  CHECK(s.proposer == 3.0);
}

TEST_CASE("a single bidder pays nothing") {
  Rng rng(1);
  const std::vector<Block> blocks = {block_worth(4, 5)};
  const auto out = run_auction(blocks, rng);
  REQUIRE(out);
  CHECK(out->winner == 4);
  CHECK(out->payment == 0.0);
}

TEST_CASE("no builders means no auction and zero payoffs") {
  Rng rng(1);
  const auto out = run_auction(std::span<const Block>{}, rng);
  CHECK_FALSE(out);
  const auto s = settle(out, 4, 0.5);
  for (double p : s.payoffs) CHECK(p == 0.0);
  CHECK(s.proposer == 0.0);
  CHECK(conservation_residual(out, s) == 0.0);
}

TEST_CASE("ties are broken uniformly over seeds") {
  const std::vector<Block> blocks = {block_worth(0, 4), block_worth(1, 4)};
  int first = 0;
  const int trials = 10'000;
  for (int seed = 0; seed < trials; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    const auto out = run_auction(blocks, rng);
    REQUIRE(out);
    CHECK(out->payment == 4.0);
    first += out->winner == 0;
  }
  // 4 standard deviations of a fair coin over 10^4 trials is 200.
  CHECK(std::abs(first - trials / 2) < 200);
}

TEST_CASE("rng is untouched when there is no tie") {
  Rng used(9), fresh(9);
  const std::vector<Block> blocks = {block_worth(0, 2), block_worth(1, 1)};
  (void)run_auction(blocks, used);
  CHECK(used.next() == fresh.next());
}

TEST_CASE("settle worked example across rebates") {
  const auto out = one_builder_one_searcher();
  for (double a : {0.0, 0.25, 0.5, 1.0}) {
    const auto s = settle(out, 2, a);
    CHECK(s.payoffs[1] == doctest::Approx(0.05 + 0.25 * a).epsilon(1e-14));
    CHECK(s.payoffs[0] == doctest::Approx((1 - a) * 0.25).epsilon(1e-14));
    CHECK(s.proposer == 0.0);
    CHECK(conservation_residual(out, s) < 1e-15);
  }
}

TEST_CASE("zero rebate leaves searchers (1 - beta) v") {
  const auto s = settle(one_builder_one_searcher(), 2, 0.0);
  CHECK(s.payoffs[1] == doctest::Approx(0.5 * 0.1));
  CHECK(s.payoffs[0] == doctest::Approx(0.25));
}

TEST_CASE("excluded searchers and losing builders get exactly zero") {
  Rng rng(3);
  Block a;
  a.builder = 0;
  a.entries = {{0, 0.3, 0.3}, {2, 0.2, 0.1}};
  Block b = block_worth(1, 0.35);
  const std::vector<Block> blocks = {a, b};
  const auto out = run_auction(blocks, rng);
  const auto s = settle(out, 4, 0.6);
  CHECK(out->winner == 0);
  CHECK(s.payoffs[1] == 0.0);
  CHECK(s.payoffs[3] == 0.0);
  CHECK(s.payoffs[2] > 0.0);
  CHECK(conservation_residual(out, s) < 1e-15);
}

TEST_CASE("settlement conserves value and is monotone in the rebate") {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const std::size_t nb = 1 + rng.index(4), ns = rng.index(5);
    std::vector<Block> blocks;
    for (std::size_t j = 0; j < nb; ++j) {
      Block b;
      b.builder = j;
      const double own = rng.exponential(10.0);
      b.entries.push_back({j, own, own});
      for (std::size_t i = 0; i < ns; ++i)
        if (rng.bernoulli(0.6)) {
          const double v = rng.exponential(10.0), beta = rng.uniform();
          b.entries.push_back({nb + i, v, beta * v});
        }
      blocks.push_back(b);
    }
    const auto out = run_auction(blocks, rng);
    REQUIRE(out);
    double prev_builder = 1e300;
    std::vector<double> prev_searchers(nb + ns, -1.0);
    for (double a = 0.0; a <= 1.0; a += 0.125) {
      const auto s = settle(out, nb + ns, a);
      CHECK(conservation_residual(out, s) <= 1e-12);
      CHECK(s.payoffs[out->winner] <= prev_builder + 1e-15);
      prev_builder = s.payoffs[out->winner];
      for (std::size_t i = nb; i < nb + ns; ++i) {
        CHECK(s.payoffs[i] >= 0.0);
        CHECK(s.payoffs[i] >= prev_searchers[i] - 1e-15);
        prev_searchers[i] = s.payoffs[i];
      }
      for (std::size_t j = 0; j < nb; ++j)
        if (j != out->winner) CHECK(s.payoffs[j] == 0.0);
    }
  }
}

TEST_CASE("rebate shares sum to one over included searchers") {
  Block b;
  b.builder = 0;
  b.entries = {{0, 0.2, 0.2}, {1, 0.1, 0.03}, {2, 0.3, 0.12}, {3, 0.05, 0.05}};
  AuctionOutcome out{0, b, 0.1, {{0, 0.4}}};
  const auto with = settle(out, 4, 1.0);
  const auto without = settle(out, 4, 0.0);
  double rebate_total = 0.0;
  for (AgentIndex i = 1; i < 4; ++i) rebate_total += with.payoffs[i] - without.payoffs[i];
  CHECK(rebate_total == doctest::Approx(b.total_bids() - out.payment).epsilon(1e-14));
  // shares are proportional to bids
  CHECK((with.payoffs[2] - without.payoffs[2]) / (with.payoffs[1] - without.payoffs[1]) ==
        doctest::Approx(4.0));
}

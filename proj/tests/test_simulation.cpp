#include <doctest.h>

#include <cmath>

#include "rolesim/analytic.hpp"
#include "rolesim/errors.hpp"
#include "rolesim/simulation.hpp"
#include "rolesim/sweep.hpp"

using namespace rolesim;

namespace {

Scenario fixed_scenario(std::vector<double> values) {
  Scenario s;
  s.graph = InteractionGraph(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.bundles.push_back({i, values[i]});
  return s;
}

SimConfig small(std::size_t nb, std::size_t ns, std::size_t rounds, double pc, std::uint64_t seed) {
  SimConfig c;
  c.n_builders = nb;
  c.n_searchers = ns;
  c.rounds = rounds;
  c.conflict_probability = pc;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("cov examples") {
  CHECK(cov(std::vector<double>{5, 5, 5, 5}) == 0.0);
  CHECK(cov(std::vector<double>{0, 0, 0}) == 0.0);
  CHECK(cov(std::vector<double>{1, 3}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS(cov(std::vector<double>{}));
}

TEST_CASE("moving average is a trailing window mean") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const auto m = moving_average(x, 2);
  CHECK(m == std::vector<double>{1, 1.5, 2.5, 3.5, 4.5});
  CHECK(moving_average(x, 10).back() == 3.0);
  CHECK(tail_mean(std::vector<double>{0, 0, 0, 0, 0, 0, 0, 0, 0, 10}) == 10.0);
  CHECK(tail_mean(std::vector<double>{1, 2, 3, 4}, 0.5) == 3.5);
}

TEST_CASE("one builder and one searcher without conflict settle as worked by hand") {
  // Builder 0 owns 0.2, searcher 1 owns 0.1 and quotes ratio 0.5 (gamma1 = gamma2 = 1).
  const auto s = fixed_scenario({0.2, 0.1});
  for (double a : {0.0, 0.5, 1.0}) {
    Rng rng(1);
    const auto out = play_round(s, {{a}, {{1.0, 1.0}}}, kUnboundedCapacity, rng);
    CHECK(out.bid_ratios[0][0] == doctest::Approx(0.5));
    REQUIRE(out.auction);
    CHECK(out.auction->winning_block.contains(1));
    CHECK(out.settlement.payoffs[1] == doctest::Approx(0.05 + 0.25 * a).epsilon(1e-14));
    CHECK(out.settlement.payoffs[0] == doctest::Approx((1 - a) * 0.25).epsilon(1e-14));
    CHECK(out.settlement.proposer == 0.0);
  }
}

TEST_CASE("without conflicts a lone searcher is always included") {
  const auto res = run_simulation([] {
    auto c = small(1, 1, 500, 0.0, 3);
    c.record_rounds = true;
    return c;
  }());
  for (const auto& r : res.records) {
    REQUIRE(r.winner);
    CHECK(std::find(r.included.begin(), r.included.end(), 1) != r.included.end());
    CHECK(r.payment == 0.0);
  }
}

TEST_CASE("builders only: own-bundle blocks and empty searcher metrics") {
  const auto res = run_simulation(small(3, 0, 200, 0.5, 4), true);
  const auto& m = res.metrics;
  REQUIRE(m.size() == 200);
  for (std::size_t t = 0; t < m.size(); ++t) {
    CHECK(std::isnan(m.bid_ratio[t]));
    CHECK(std::isnan(m.searcher_reward[t]));
    CHECK(std::isnan(m.cov_gamma1[t]));
    CHECK(m.winner[t] >= 0);
    CHECK(m.winner[t] < 3);
  }
  CHECK_THROWS_AS(small(3, 0, 10, 0.5, 4).validate(), ConfigError);
}

TEST_CASE("searchers only: nobody builds and everyone earns zero") {
  const auto res = run_simulation(small(0, 4, 100, 0.5, 5), true);
  for (std::size_t t = 0; t < res.metrics.size(); ++t) {
    CHECK(res.metrics.searcher_reward[t] == 0.0);
    CHECK(res.metrics.winner[t] == -1);
    CHECK(res.metrics.proposer_reward[t] == 0.0);
  }
}

TEST_CASE("replaying a seed reproduces every round record") {
  auto c = small(3, 4, 100, 0.6, 77);
  c.record_rounds = true;
  const auto a = run_simulation(c);
  const auto b = run_simulation(c);
  CHECK(a.records == b.records);
  CHECK(a.metrics == b.metrics);
  c.seed = 78;
  CHECK_FALSE(run_simulation(c).metrics == a.metrics);
}

TEST_CASE("per-round conservation holds") {
  for (double pc : {0.0, 0.5, 1.0}) {
    const auto res = run_simulation(small(4, 6, 1000, pc, 8));
    CHECK(res.metrics.max_residual <= 1e-12);
  }
}

TEST_CASE("losers record zero in the fitness of the played strategy") {
  auto c = small(2, 2, 1, 0.5, 9);
  c.ga.trigger_probability = 0.0;
  Simulation sim(c);
  const auto before = sim.pools();
  const auto rec = sim.run_round();
  for (AgentIndex a = 0; a < 4; ++a) {
    const auto k = rec.chosen[a];
    const double expected = 0.5 * before[a].strategies[k].fitness + 0.5 * rec.payoffs[a];
    CHECK(sim.pools()[a].strategies[k].fitness == doctest::Approx(expected));
    for (std::size_t j = 0; j < kPoolSize; ++j)
      if (j != k) CHECK(sim.pools()[a].strategies[j].fitness == before[a].strategies[j].fitness);
  }
}

TEST_CASE("frozen two-builder market matches the closed-form expectation") {
  // Searcher value fixed, builder values redrawn each round, no learning.
  OneSidedMarket m;
  m.searcher_value = 0.1;
  m.alpha13 = 16.0 / 31.0;
  m.alpha23 = 4.0 / 31.0;
  const SearcherParams params{decode_segment(12, 1, 5), decode_segment(9, 0, 4)};
  m.beta31 = bid_ratio(params, m.alpha13);
  m.beta32 = bid_ratio(params, m.alpha23);
  const double expected = expected_searcher_payoff(m);

  Rng rng(10);
  const std::size_t n = 200'000;
  double sum = 0.0, sum2 = 0.0;
  auto s = fixed_scenario({0, 0, m.searcher_value});
  for (std::size_t i = 0; i < n; ++i) {
    s.bundles[0].base_value = rng.exponential(10.0);
    s.bundles[1].base_value = rng.exponential(10.0);
    const auto out = play_round(s, {{m.alpha13, m.alpha23}, {params}}, kUnboundedCapacity, rng);
    const double x = out.settlement.payoffs[2];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - expected) < 4.0 * se);
}

TEST_CASE("sweep shape, ordering and independence from jobs") {
  SimConfig base = small(2, 3, 1, 0.0, 42);
  const std::vector<double> ps = {0.0, 0.5, 1.0};
  const auto rows = sweep_conflict(base, ps, 1, 1);
  CHECK(rows.size() == ps.size());

  base.rounds = 200;
  const auto one = sweep_conflict(base, ps, 3, 1);
  const auto many = sweep_conflict(base, ps, 3, 4);
  REQUIRE(one.size() == 9);
  CHECK(one == many);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].p_index == i / 3);
    CHECK(one[i].repetition == i % 3);
    CHECK(one[i].seed == replica_seed(42, i / 3, i % 3));
    CHECK(one[i].max_residual <= 1e-12);
  }
}

TEST_CASE("simulation configuration is validated") {
  CHECK_THROWS_AS(small(1, 1, 0, 0.5, 1).validate(), ConfigError);
  CHECK_THROWS_AS(small(1, 0, 10, 0.5, 1).validate(true), ConfigError);
  CHECK_THROWS_AS(small(1, 1, 10, 1.5, 1).validate(), ConfigError);
  auto c = small(1, 1, 10, 0.5, 1);
  c.temperature = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

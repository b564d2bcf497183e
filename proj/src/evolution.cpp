#include "rolesim/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rolesim/errors.hpp"

namespace rolesim {

void GAConfig::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(trigger_probability)) throw ConfigError("GA trigger probability must be in [0, 1]");
  if (!unit(mutation_rate)) throw ConfigError("mutation rate must be in [0, 1]");
  if (!(elimination_ratio >= 0.0 && elimination_ratio < 1.0))
    throw ConfigError("elimination ratio must be in [0, 1)");
}

StrategyPool StrategyPool::random(AgentIndex owner, int width, Rng& rng, double temperature,
                                  double learning_rate) {
  StrategyPool pool;
  pool.owner = owner;
  pool.temperature = temperature;
  pool.learning_rate = learning_rate;
  pool.strategies.reserve(kPoolSize);
  for (std::size_t k = 0; k < kPoolSize; ++k) {
    const auto bits = static_cast<std::uint32_t>(rng.next() >> (64 - width));
    pool.strategies.emplace_back(width, bits, 0.0);
  }
  return pool;
}

std::vector<double> softmax_probabilities(std::span<const Chromosome> strategies,
                                          double temperature) {
  std::vector<double> p(strategies.size());
  if (strategies.empty()) return p;
  double top = strategies.front().fitness;
  for (const auto& s : strategies) top = std::max(top, s.fitness);
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp((strategies[k].fitness - top) / temperature);
    total += p[k];
  }
  for (double& x : p) x /= total;
  return p;
}

namespace {

// Roulette over a subset of pool indices.
std::size_t roulette(std::span<const Chromosome> all, std::span<const std::size_t> candidates,
                     double temperature, Rng& rng) {
  double top = all[candidates.front()].fitness;
  for (auto c : candidates) top = std::max(top, all[c].fitness);
  std::vector<double> w(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    w[i] = std::exp((all[candidates[i]].fitness - top) / temperature);
    total += w[i];
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (u < w[i]) return candidates[i];
    u -= w[i];
  }
  return candidates.back();
}

}  // namespace

std::size_t select_strategy(const StrategyPool& pool, Rng& rng) {
  if (pool.strategies.empty()) throw std::invalid_argument("cannot select from an empty pool");
  std::vector<std::size_t> all(pool.size());
  std::iota(all.begin(), all.end(), 0);
  return roulette(pool.strategies, all, pool.temperature, rng);
}

void update_fitness(StrategyPool& pool, std::size_t k, double payoff) {
  auto& f = pool.strategies.at(k).fitness;
  f = (1.0 - pool.learning_rate) * f + pool.learning_rate * payoff;
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, int point) {
  if (a.width() != b.width()) throw std::invalid_argument("crossover of mixed widths");
  const int width = a.width();
  if (point < 1 || point >= width) throw std::invalid_argument("crossover point out of range");
  const std::uint32_t tail = (1U << (width - point)) - 1U;
  const std::uint32_t head = ((1U << width) - 1U) & ~tail;
  const double f = 0.5 * (a.fitness + b.fitness);
  return {Chromosome(width, (a.value() & head) | (b.value() & tail), f),
          Chromosome(width, (b.value() & head) | (a.value() & tail), f)};
}

void evolve(StrategyPool& pool, const GAConfig& config, Rng& rng) {
  const std::size_t target = pool.size();
  if (target == 0) return;
  const auto n_remove = static_cast<std::size_t>(
      std::floor(static_cast<double>(target) * config.elimination_ratio));

  std::vector<std::size_t> order(target);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return pool.strategies[x].fitness < pool.strategies[y].fitness;
  });
  std::vector<bool> removed(target, false);
  for (std::size_t i = 0; i < std::min(n_remove, target - 1); ++i) removed[order[i]] = true;

  std::vector<Chromosome> survivors;
  for (std::size_t k = 0; k < target; ++k)
    if (!removed[k]) survivors.push_back(pool.strategies[k]);

  std::vector<std::size_t> idx(survivors.size());
  std::iota(idx.begin(), idx.end(), 0);
  const int width = survivors.front().width();

  std::vector<Chromosome> next = survivors;
  while (next.size() < target) {
    const std::size_t p1 = roulette(survivors, idx, pool.temperature, rng);
    std::size_t p2 = p1;
    if (survivors.size() > 1) {
      std::vector<std::size_t> rest;
      for (auto i : idx)
        if (i != p1) rest.push_back(i);
      p2 = roulette(survivors, rest, pool.temperature, rng);
    }
    const int point = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(width - 1)));
    auto [c1, c2] = crossover(survivors[p1], survivors[p2], point);
    for (Chromosome* child : {&c1, &c2})
      for (int b = 0; b < width; ++b)
        if (rng.bernoulli(config.mutation_rate)) child->flip(b);
    next.push_back(c1);
    if (next.size() < target) next.push_back(c2);
  }
  pool.strategies = std::move(next);
}

}  // namespace rolesim

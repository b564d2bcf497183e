#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rolesim/market.hpp"
#include "rolesim/rng.hpp"
#include "rolesim/strategy.hpp"

namespace rolesim {

inline constexpr std::size_t kPoolSize = 20;

struct GAConfig {
  double trigger_probability = 0.01;
  double elimination_ratio = 0.5;
  double mutation_rate = 0.01;

  /// Throws ConfigError unless every rate lies in [0, 1] and elimination < 1.
  void validate() const;
};

/// One agent's repertoire of strategies with EMA fitness.
struct StrategyPool {
  AgentIndex owner = 0;
  std::vector<Chromosome> strategies;
  double temperature = 2.0;
  double learning_rate = 0.5;

  /// kPoolSize uniformly random genomes of the given width, fitness 0.
  static StrategyPool random(AgentIndex owner, int width, Rng& rng,
                             double temperature = 2.0, double learning_rate = 0.5);

  std::size_t size() const { return strategies.size(); }
};

/// Boltzmann weights exp(f / T) normalised to 1. Shift-invariant in f.
std::vector<double> softmax_probabilities(std::span<const Chromosome> strategies,
                                          double temperature);

/// Roulette-wheel draw from softmax_probabilities; returns the strategy index.
std::size_t select_strategy(const StrategyPool& pool, Rng& rng);

/// f_k <- (1 - eta) f_k + eta * payoff; other strategies keep their fitness.
void update_fitness(StrategyPool& pool, std::size_t k, double payoff);

/// One GA generation: drop the floor(size * elimination) lowest-fitness
/// strategies (lower index first among equals), then refill to the original
/// size with offspring of roulette-selected surviving parents. Offspring come
/// from single-point crossover, inherit the mean parent fitness and have each
/// bit flipped with the mutation rate.
void evolve(StrategyPool& pool, const GAConfig& config, Rng& rng);

/// Single-point crossover at `point` in [1, width - 1]: the first child takes
/// a's leading `point` bits and b's tail, the second the reverse.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b, int point);

}  // namespace rolesim

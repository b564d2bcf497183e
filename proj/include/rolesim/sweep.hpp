#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rolesim/simulation.hpp"

namespace rolesim {

/// Post-convergence summary of one replica.
struct SweepRow {
  std::size_t p_index = 0;
  double conflict_probability = 0.0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double bid_ratio = 0.0;
  double rebate_ratio = 0.0;
  double searcher_reward = 0.0;
  double builder_reward = 0.0;
  double proposer_reward = 0.0;
  double max_residual = 0.0;

  bool operator==(const SweepRow&) const = default;
};

/// Metric names of the long-format sweep table, in output order.
inline const std::vector<std::string> kSweepMetrics = {
    "bid_ratio", "rebate_ratio", "searcher_reward", "builder_reward", "proposer_reward"};

double sweep_metric(const SweepRow& row, const std::string& metric);

/// Fraction of final rounds averaged for post-convergence statistics.
inline constexpr double kConvergedTail = 0.1;

/// Seed of replica (p_index, repetition) under a master seed.
std::uint64_t replica_seed(std::uint64_t master, std::size_t p_index, std::size_t repetition);

/// Runs `repetitions` independent replicas per conflict probability and
/// summarises each by its final-10% averages. Rows are ordered by
/// (p_index, repetition) regardless of `jobs`.
std::vector<SweepRow> sweep_conflict(const SimConfig& base, std::span<const double> p_values,
                                     std::size_t repetitions, std::size_t jobs = 1);

}  // namespace rolesim

#include "rolesim/sweep.hpp"

#include <stdexcept>

#include "rolesim/errors.hpp"
#include "rolesim/parallel.hpp"
#include "rolesim/rng.hpp"

namespace rolesim {

double sweep_metric(const SweepRow& row, const std::string& metric) {
  if (metric == "bid_ratio") return row.bid_ratio;
  if (metric == "rebate_ratio") return row.rebate_ratio;
  if (metric == "searcher_reward") return row.searcher_reward;
  if (metric == "builder_reward") return row.builder_reward;
  if (metric == "proposer_reward") return row.proposer_reward;
  throw std::invalid_argument("unknown sweep metric: " + metric);
}

std::uint64_t replica_seed(std::uint64_t master, std::size_t p_index, std::size_t repetition) {
  return derive_seed(master, p_index, repetition);
}

std::vector<SweepRow> sweep_conflict(const SimConfig& base, std::span<const double> p_values,
                                     std::size_t repetitions, std::size_t jobs) {
  if (repetitions == 0) throw ConfigError("repetitions must be at least 1");
  if (p_values.empty()) throw ConfigError("conflict probability grid is empty");
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("conflict probability must be in [0, 1]");
  base.validate();

  std::vector<SweepRow> rows(p_values.size() * repetitions);
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const std::size_t p_index = i / repetitions;
    const std::size_t rep = i % repetitions;
    SimConfig cfg = base;
    cfg.conflict_probability = p_values[p_index];
    cfg.seed = replica_seed(base.seed, p_index, rep);
    cfg.record_rounds = false;
    cfg.snapshot_every = 0;
    const SimulationResult res = run_simulation(cfg);
    const auto& m = res.metrics;

    SweepRow& row = rows[i];
    row.p_index = p_index;
    row.conflict_probability = cfg.conflict_probability;
    row.repetition = rep;
    row.seed = cfg.seed;
    row.bid_ratio = tail_mean(m.bid_ratio, kConvergedTail);
    row.rebate_ratio = tail_mean(m.rebate_ratio, kConvergedTail);
    row.searcher_reward = tail_mean(m.searcher_reward, kConvergedTail);
    row.builder_reward = tail_mean(m.builder_reward, kConvergedTail);
    row.proposer_reward = tail_mean(m.proposer_reward, kConvergedTail);
    row.max_residual = m.max_residual;
  });
  return rows;
}

}  // namespace rolesim

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rolesim/auction.hpp"
#include "rolesim/block_builder.hpp"
#include "rolesim/evolution.hpp"
#include "rolesim/market.hpp"
#include "rolesim/strategy.hpp"

namespace rolesim {

enum class Role { Builder, Searcher };

const char* role_name(Role r);

struct SimConfig {
  std::size_t n_builders = 10;
  std::size_t n_searchers = 10;
  std::size_t rounds = 10000;
  double conflict_probability = 0.8;
  double value_rate = 10.0;
  double temperature = 2.0;
  double learning_rate = 0.5;
  GAConfig ga;
  std::size_t capacity = kUnboundedCapacity;
  std::uint64_t seed = 1;
  std::size_t ma_window = 200;
  std::size_t snapshot_every = 0;  ///< 0 disables pool snapshots
  bool record_rounds = false;

  std::size_t agents() const { return n_builders + n_searchers; }

  /// Throws ConfigError. A role may be empty only when allow_empty_role is
  /// set (the meta-game explores such profiles); at least 2 agents always.
  void validate(bool allow_empty_role = false) const;
};

/// Agent layout: builders occupy [0, n_builders), searchers follow.
struct RoundActions {
  std::vector<double> rebates;                 ///< per builder
  std::vector<SearcherParams> searcher_params;  ///< per searcher

  bool operator==(const RoundActions&) const = default;
};

struct RoundOutcome {
  std::vector<std::vector<double>> bid_ratios;  ///< [searcher][builder]
  std::vector<Block> blocks;                    ///< one per builder
  std::optional<AuctionOutcome> auction;
  Settlement settlement;
  double residual = 0.0;  ///< conservation residual of this round
};

/// Resolves one round for fixed actions: searchers quote a bid ratio to each
/// builder from its announced rebate, every builder merges its own bundle
/// with all searcher bundles, the blocks go to auction and the winner's block
/// is settled. `rng` is only used to break exact auction ties.
RoundOutcome play_round(const Scenario& scenario, const RoundActions& actions,
                        std::size_t capacity, Rng& rng);

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::size_t> chosen;      ///< strategy index per agent
  std::vector<Chromosome> strategies;   ///< played genome per agent
  RoundActions actions;
  std::vector<std::vector<double>> bid_ratios;
  std::optional<AgentIndex> winner;
  std::vector<AgentIndex> included;  ///< bundles of the winning block, in order
  double payment = 0.0;
  std::vector<double> payoffs;
  double proposer = 0.0;

  bool operator==(const RoundRecord&) const = default;
};

/// Per-round series. Entries are NaN where the role is empty.
struct MetricsSeries {
  std::vector<double> bid_ratio;        ///< mean over searcher x builder quotes
  std::vector<double> rebate_ratio;     ///< mean announced rebate
  std::vector<double> cov_rebate;       ///< mean per-builder pool CoV of the rebate gene
  std::vector<double> cov_gamma1;
  std::vector<double> cov_gamma2;
  std::vector<double> searcher_reward;  ///< mean payoff per searcher
  std::vector<double> builder_reward;   ///< mean payoff per builder
  std::vector<double> proposer_reward;
  std::vector<long long> winner;        ///< -1 when no auction took place
  double max_residual = 0.0;

  std::size_t size() const { return bid_ratio.size(); }
  bool operator==(const MetricsSeries&) const = default;
};

struct PoolSnapshot {
  std::size_t round = 0;
  std::vector<Role> roles;
  std::vector<StrategyPool> pools;
};

struct SimulationResult {
  MetricsSeries metrics;
  std::vector<RoundRecord> records;  ///< filled when record_rounds is set
  std::vector<PoolSnapshot> snapshots;
};

/// A single co-evolving market. Strictly sequential; own one per replica.
class Simulation {
 public:
  explicit Simulation(const SimConfig& config, bool allow_empty_role = false);

  /// Steps 1-4 of one round: draw the scenario, let every agent pick a
  /// strategy, resolve the round, update fitness of the played strategies
  /// (agents that earned nothing record 0) and run the GA per agent with the
  /// trigger probability.
  RoundRecord run_round();

  const std::vector<StrategyPool>& pools() const { return pools_; }
  Role role(AgentIndex a) const { return a < config_.n_builders ? Role::Builder : Role::Searcher; }
  std::size_t rounds_played() const { return round_; }
  const SimConfig& config() const { return config_; }

  /// Per-round metrics collected so far.
  const MetricsSeries& metrics() const { return metrics_; }

 private:
  void record_metrics(const RoundRecord& rec, const RoundOutcome& out);

  SimConfig config_;
  Rng rng_;
  std::vector<StrategyPool> pools_;
  MetricsSeries metrics_;
  std::size_t round_ = 0;
};

/// Runs config.rounds rounds and collects metrics, optional per-round records
/// and pool snapshots every snapshot_every rounds. The final pools are
/// always the last snapshot.
SimulationResult run_simulation(const SimConfig& config, bool allow_empty_role = false);

/// Population standard deviation over mean; 0 when the mean is 0.
/// Throws std::invalid_argument on an empty list.
double cov(std::span<const double> values);

/// Trailing mean over the last `window` entries (fewer at the start).
std::vector<double> moving_average(std::span<const double> series, std::size_t window);

/// Mean of the final ceil(fraction * size) entries, skipping NaN.
double tail_mean(std::span<const double> series, double fraction = 0.1);

}  // namespace rolesim

#include "rolesim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rolesim/errors.hpp"

namespace rolesim {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_or_nan(double sum, std::size_t count) {
  return count == 0 ? kNaN : sum / static_cast<double>(count);
}
}  // namespace

const char* role_name(Role r) { return r == Role::Builder ? "builder" : "searcher"; }

void SimConfig::validate(bool allow_empty_role) const {
  if (agents() < 2) throw ConfigError("need at least 2 agents in total");
  if (!allow_empty_role && (n_builders == 0 || n_searchers == 0))
    throw ConfigError("builders and searchers must both be at least 1");
  if (rounds == 0) throw ConfigError("rounds must be at least 1");
  if (!(conflict_probability >= 0.0 && conflict_probability <= 1.0))
    throw ConfigError("conflict probability must be in [0, 1]");
  if (!(value_rate > 0.0) || !std::isfinite(value_rate))
    throw ConfigError("value rate must be positive");
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ConfigError("temperature must be positive");
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0))
    throw ConfigError("learning rate must be in [0, 1]");
  if (capacity == 0) throw ConfigError("block capacity must be at least 1");
  if (ma_window == 0) throw ConfigError("moving-average window must be at least 1");
  ga.validate();
}

RoundOutcome play_round(const Scenario& scenario, const RoundActions& actions,
                        std::size_t capacity, Rng& rng) {
  const std::size_t nb = actions.rebates.size();
  const std::size_t ns = actions.searcher_params.size();
  if (nb + ns != scenario.size()) throw std::invalid_argument("actions do not match scenario size");

  RoundOutcome out;
  out.bid_ratios.assign(ns, std::vector<double>(nb, 0.0));
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t b = 0; b < nb; ++b)
      out.bid_ratios[s][b] = bid_ratio(actions.searcher_params[s], actions.rebates[b]);

  out.blocks.reserve(nb);
  std::vector<PendingBundle> pending;
  for (std::size_t b = 0; b < nb; ++b) {
    pending.clear();
    pending.push_back({b, scenario.bundles[b].base_value, 1.0});
    for (std::size_t s = 0; s < ns; ++s) {
      const AgentIndex a = nb + s;
      pending.push_back({a, scenario.bundles[a].base_value, out.bid_ratios[s][b]});
    }
    out.blocks.push_back(build_block(b, pending, scenario.graph, capacity));
  }

  out.auction = run_auction(out.blocks, rng);
  const double rebate = out.auction ? actions.rebates[out.auction->winner] : 0.0;
  out.settlement = settle(out.auction, scenario.size(), rebate);
  out.residual = conservation_residual(out.auction, out.settlement);
  return out;
}

Simulation::Simulation(const SimConfig& config, bool allow_empty_role)
    : config_(config), rng_(config.seed) {
  config_.validate(allow_empty_role);
  const std::size_t n = config_.agents();
  pools_.reserve(n);
  for (AgentIndex a = 0; a < n; ++a) {
    const int width = role(a) == Role::Builder ? kBuilderWidth : kSearcherWidth;
    pools_.push_back(
        StrategyPool::random(a, width, rng_, config_.temperature, config_.learning_rate));
  }
}

RoundRecord Simulation::run_round() {
  const std::size_t nb = config_.n_builders;
  const std::size_t n = config_.agents();

  const Scenario scenario =
      draw_scenario(n, config_.conflict_probability, config_.value_rate, rng_.next());

  RoundRecord rec;
  rec.round = round_;
  rec.chosen.resize(n);
  rec.strategies.resize(n);
  rec.actions.rebates.resize(nb);
  rec.actions.searcher_params.resize(n - nb);
  for (AgentIndex a = 0; a < n; ++a) {
    const std::size_t k = select_strategy(pools_[a], rng_);
    rec.chosen[a] = k;
    rec.strategies[a] = pools_[a].strategies[k];
    if (role(a) == Role::Builder)
      rec.actions.rebates[a] = decode_builder(rec.strategies[a]).rebate;
    else
      rec.actions.searcher_params[a - nb] = decode_searcher(rec.strategies[a]);
  }

  const RoundOutcome out = play_round(scenario, rec.actions, config_.capacity, rng_);
  rec.bid_ratios = out.bid_ratios;
  if (out.auction) {
    rec.winner = out.auction->winner;
    for (const auto& e : out.auction->winning_block.entries) rec.included.push_back(e.bundle);
  }
  rec.payment = out.auction ? out.auction->payment : 0.0;
  rec.payoffs = out.settlement.payoffs;
  rec.proposer = out.settlement.proposer;

  for (AgentIndex a = 0; a < n; ++a) update_fitness(pools_[a], rec.chosen[a], rec.payoffs[a]);
  for (AgentIndex a = 0; a < n; ++a)
    if (rng_.bernoulli(config_.ga.trigger_probability)) evolve(pools_[a], config_.ga, rng_);

  record_metrics(rec, out);
  ++round_;
  return rec;
}

void Simulation::record_metrics(const RoundRecord& rec, const RoundOutcome& out) {
  const std::size_t nb = config_.n_builders;
  const std::size_t ns = config_.n_searchers;

  double bid_sum = 0.0;
  for (const auto& row : rec.bid_ratios)
    for (double b : row) bid_sum += b;
  metrics_.bid_ratio.push_back(mean_or_nan(bid_sum, nb * ns));

  double rebate_sum = 0.0;
  for (double r : rec.actions.rebates) rebate_sum += r;
  metrics_.rebate_ratio.push_back(mean_or_nan(rebate_sum, nb));

  std::vector<double> genes(kPoolSize);
  auto pool_cov = [&](const StrategyPool& pool, int segment) {
    genes.resize(pool.size());
    for (std::size_t k = 0; k < pool.size(); ++k)
      genes[k] = static_cast<double>(pool.strategies[k].segment(segment));
    return cov(genes);
  };
  double cov_a = 0.0, cov_g1 = 0.0, cov_g2 = 0.0;
  double reward_b = 0.0, reward_s = 0.0;
  for (AgentIndex a = 0; a < pools_.size(); ++a) {
    if (role(a) == Role::Builder) {
      cov_a += pool_cov(pools_[a], 0);
      reward_b += rec.payoffs[a];
    } else {
      cov_g1 += pool_cov(pools_[a], 0);
      cov_g2 += pool_cov(pools_[a], 1);
      reward_s += rec.payoffs[a];
    }
  }
  metrics_.cov_rebate.push_back(mean_or_nan(cov_a, nb));
  metrics_.cov_gamma1.push_back(mean_or_nan(cov_g1, ns));
  metrics_.cov_gamma2.push_back(mean_or_nan(cov_g2, ns));
  metrics_.builder_reward.push_back(mean_or_nan(reward_b, nb));
  metrics_.searcher_reward.push_back(mean_or_nan(reward_s, ns));
  metrics_.proposer_reward.push_back(rec.proposer);
  metrics_.winner.push_back(rec.winner ? static_cast<long long>(*rec.winner) : -1);
  metrics_.max_residual = std::max(metrics_.max_residual, out.residual);
}

SimulationResult run_simulation(const SimConfig& config, bool allow_empty_role) {
  Simulation sim(config, allow_empty_role);
  SimulationResult result;
  const auto& cfg = sim.config();
  if (cfg.record_rounds) result.records.reserve(cfg.rounds);

  auto snapshot = [&] {
    PoolSnapshot snap;
    snap.round = sim.rounds_played();
    snap.pools = sim.pools();
    for (AgentIndex a = 0; a < snap.pools.size(); ++a) snap.roles.push_back(sim.role(a));
    result.snapshots.push_back(std::move(snap));
  };

  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    RoundRecord rec = sim.run_round();
    if (cfg.record_rounds) result.records.push_back(std::move(rec));
    if (cfg.snapshot_every > 0 && sim.rounds_played() % cfg.snapshot_every == 0) snapshot();
  }
  if (result.snapshots.empty() || result.snapshots.back().round != sim.rounds_played()) snapshot();
  result.metrics = sim.metrics();
  return result;
}

double cov(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cov of an empty list");
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (mean == 0.0) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n) / mean;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving-average window must be positive");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const std::size_t start = t + 1 >= window ? t + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t i = start; i <= t; ++i) sum += series[i];
    out[t] = sum / static_cast<double>(t + 1 - start);
  }
  return out;
}

double tail_mean(std::span<const double> series, double fraction) {
  if (series.empty()) return kNaN;
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(series.size()))));
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = series.size() - std::min(count, series.size()); i < series.size(); ++i) {
    if (std::isnan(series[i])) continue;
    sum += series[i];
    ++used;
  }
  return mean_or_nan(sum, used);
}

}  // namespace rolesim

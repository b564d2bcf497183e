#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rolesim/rng.hpp"

namespace rolesim {

using AgentIndex = std::size_t;

/// One profit opportunity per agent per round.
struct Bundle {
  AgentIndex owner = 0;
  double base_value = 0.0;

  bool operator==(const Bundle&) const = default;
};

/// Pairwise interaction weights between bundles. A weight w(i, k) is applied
/// to bundle i once bundle k has executed ahead of it in the same block:
/// negative is competitive, zero independent, positive complementary.
/// Weights are clamped to >= -1 so a single interaction can at most wipe a
/// bundle's value out.
class InteractionGraph {
 public:
  InteractionGraph() = default;
  explicit InteractionGraph(std::size_t n) : n_(n), weights_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double weight(AgentIndex i, AgentIndex k) const { return weights_[i * n_ + k]; }

  /// Sets w(i, k); self-weights are rejected.
  void set_weight(AgentIndex i, AgentIndex k, double w);
  void set_symmetric(AgentIndex i, AgentIndex k, double w) {
    set_weight(i, k, w);
    set_weight(k, i, w);
  }

  bool symmetric() const;

  /// Unordered pairs {i < k} whose weight is -1 in both directions.
  std::vector<std::pair<AgentIndex, AgentIndex>> conflict_pairs() const;

  bool operator==(const InteractionGraph&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
};

struct Scenario {
  std::uint64_t seed = 0;
  double conflict_probability = 0.0;
  double value_rate = 10.0;
  std::vector<Bundle> bundles;
  InteractionGraph graph;

  std::size_t size() const { return bundles.size(); }
  bool operator==(const Scenario&) const = default;
};

/// Value update when another bundle executes first: v * (1 + phi).
constexpr double apply_interaction(double value, double weight) { return value + weight * value; }

/// Private values ~ Exp(value_rate) i.i.d.; every unordered pair conflicts
/// completely (w = -1 both ways) with probability p_c, else is independent.
/// Throws ConfigError on n < 2, p_c outside [0, 1] or value_rate <= 0.
Scenario draw_scenario(std::size_t n, double p_c, double value_rate, std::uint64_t seed);
Scenario draw_scenario(std::size_t n, double p_c, double value_rate, Rng& rng);

/// JSON with fields seed, n, p_C, lambda, values[], conflict_pairs[[i,k],...].
/// Only the two-point scheme round-trips; other weights are rejected on dump.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

}  // namespace rolesim

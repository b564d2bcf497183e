#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rolesim/simulation.hpp"

namespace rolesim {

/// Meta-strategy indices used throughout the meta-game.
enum MetaStrategy : std::size_t { kBuilding = 0, kSharing = 1 };

struct HptRow {
  std::size_t n_building = 0;
  std::size_t n_sharing = 0;
  std::optional<double> u_building;  ///< absent when nobody builds
  std::optional<double> u_sharing;   ///< absent when nobody shares
  std::size_t samples = 0;           ///< simulations averaged into the row
  double max_residual = 0.0;         ///< worst per-round conservation residual seen
};

/// Heuristic payoff table over all role splits of m agents, one row per
/// n_building in 0..m.
struct HeuristicPayoffTable {
  std::size_t m = 0;
  double conflict_probability = 0.0;
  std::vector<HptRow> rows;

  /// Row with the given number of builders, or nullptr.
  const HptRow* find(std::size_t n_building) const;
};

/// Simulates every profile (n_building, m - n_building) `reps` times with
/// the template's settings and records mean final-10% payoffs per role.
/// Replica seeds derive from the template seed, the profile and the
/// repetition.
HeuristicPayoffTable estimate_hpt(std::size_t m, const SimConfig& sim, std::size_t reps,
                                  std::size_t jobs = 1);

/// How mutant and resident fitness enter the fixation probability.
///  - OneMutant: payoffs read from the single-mutant profile, closed-form
///    (1 - e^-x) / (1 - e^-mx). Default.
///  - FullProfile: frequency-dependent Moran process using every profile
///    with k = 1..m-1 mutants; requires population == m.
enum class FixationModel { OneMutant, FullProfile };

struct AlphaRankResult {
  double alpha = 0.0;
  std::size_t population = 0;
  FixationModel model = FixationModel::OneMutant;
  Eigen::Matrix2d transition;  ///< row-stochastic, [from][to]
  Eigen::Vector2d stationary;  ///< (building, sharing)
};

/// Fixation probability of a single mutant in a resident population of size
/// m for the scaled payoff gap x = alpha * (pi_mutant - pi_resident):
/// (1 - e^-x) / (1 - e^-mx), and exactly 1/m at x = 0.
double fixation_probability(double x, std::size_t m);

/// Stationary distribution nu = nu C of a row-stochastic matrix. Dense solve
/// of the balance equations with a power-iteration fallback (tolerance 1e-12,
/// at most 1e6 sweeps). Throws NumericalError if neither converges.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Fixation probability of the frequency-dependent Moran process, where
/// gaps[k-1] = pi_mutant - pi_resident with k mutants present (k = 1..m-1):
/// 1 / sum_{l=0}^{m-1} exp(-alpha * sum_{k<=l} gaps[k-1]). Evaluated in log space.
double moran_fixation_probability(std::span<const double> gaps, double alpha);

/// Single-population alpha-Rank over {building, sharing}: C[s][t] is the
/// probability that a single t-mutant takes over an s-population, the
/// diagonal holds the remainder. Throws ConfigError when the monomorphic or
/// required mutant rows are missing.
AlphaRankResult alpharank(const HeuristicPayoffTable& hpt, double alpha, std::size_t population,
                          FixationModel model = FixationModel::OneMutant);
AlphaRankResult alpharank(const HeuristicPayoffTable& hpt, double alpha);

std::vector<AlphaRankResult> intensity_sweep(const HeuristicPayoffTable& hpt,
                                             std::span<const double> alphas,
                                             std::size_t population,
                                             FixationModel model = FixationModel::OneMutant);

}  // namespace rolesim

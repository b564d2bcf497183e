#include "rolesim/egta.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rolesim/errors.hpp"
#include "rolesim/parallel.hpp"
#include "rolesim/rng.hpp"
#include "rolesim/sweep.hpp"

namespace rolesim {

const HptRow* HeuristicPayoffTable::find(std::size_t n_building) const {
  for (const auto& r : rows)
    if (r.n_building == n_building) return &r;
  return nullptr;
}

HeuristicPayoffTable estimate_hpt(std::size_t m, const SimConfig& sim, std::size_t reps,
                                  std::size_t jobs) {
  if (m < 2) throw ConfigError("meta-game needs at least 2 agents");
  if (reps == 0) throw ConfigError("repetitions must be at least 1");

  struct Cell {
    double building = 0.0;
    double sharing = 0.0;
    double residual = 0.0;
  };
  const std::size_t profiles = m + 1;
  std::vector<Cell> cells(profiles * reps);
  parallel_for(cells.size(), jobs, [&](std::size_t i) {
    const std::size_t n_building = i / reps;
    const std::size_t rep = i % reps;
    SimConfig cfg = sim;
    cfg.n_builders = n_building;
    cfg.n_searchers = m - n_building;
    cfg.seed = derive_seed(sim.seed, n_building, rep, 0xE97A);
    cfg.record_rounds = false;
    cfg.snapshot_every = 0;
    const auto res = run_simulation(cfg, /*allow_empty_role=*/true);
    cells[i].building = n_building > 0 ? tail_mean(res.metrics.builder_reward, kConvergedTail) : 0.0;
    cells[i].sharing =
        n_building < m ? tail_mean(res.metrics.searcher_reward, kConvergedTail) : 0.0;
    cells[i].residual = res.metrics.max_residual;
  });

  HeuristicPayoffTable hpt;
  hpt.m = m;
  hpt.conflict_probability = sim.conflict_probability;
  for (std::size_t n1 = 0; n1 < profiles; ++n1) {
    HptRow row;
    row.n_building = n1;
    row.n_sharing = m - n1;
    row.samples = reps;
    double b = 0.0, s = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      b += cells[n1 * reps + r].building;
      s += cells[n1 * reps + r].sharing;
      row.max_residual = std::max(row.max_residual, cells[n1 * reps + r].residual);
    }
    if (n1 > 0) row.u_building = b / static_cast<double>(reps);
    if (n1 < m) row.u_sharing = s / static_cast<double>(reps);
    hpt.rows.push_back(row);
  }
  return hpt;
}

namespace {

// log of (1 - e^-x) / (1 - e^-mx); finite for every finite x.
double log_fixation(double x, std::size_t m) {
  const auto mm = static_cast<double>(m);
  if (x == 0.0) return -std::log(mm);
  if (x > 0.0) return std::log(-std::expm1(-x)) - std::log(-std::expm1(-mm * x));
  // Multiplied through by e^{mx} so nothing overflows for very negative gaps.
  return (mm - 1.0) * x + std::log(-std::expm1(x)) - std::log(-std::expm1(mm * x));
}

double log_moran_fixation(std::span<const double> gaps, double alpha) {
  std::vector<double> exponents{0.0};
  double running = 0.0;
  for (double g : gaps) {
    running -= alpha * g;
    exponents.push_back(running);
  }
  const double top = *std::max_element(exponents.begin(), exponents.end());
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - top);
  return -(top + std::log(sum));
}

}  // namespace

double fixation_probability(double x, std::size_t m) {
  if (x == 0.0) return 1.0 / static_cast<double>(m);
  return std::exp(log_fixation(x, m));
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const Eigen::Index k = transition.rows();
  if (k == 0 || transition.cols() != k) throw NumericalError("transition matrix must be square");
  if (k == 1) return Eigen::VectorXd::Ones(1);

  // Generator Q = C - I built from the off-diagonals: C_ii - 1 cancels to 0
  // once the off-diagonals fall below 1e-16, while nu Q = 0 only needs their
  // ratios. Scaling Q by a positive constant leaves nu unchanged.
  Eigen::MatrixXd q = transition;
  for (Eigen::Index i = 0; i < k; ++i) {
    q(i, i) = 0.0;
    q(i, i) = -q.row(i).sum();
  }
  const double scale = q.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw NumericalError("transition matrix has no off-diagonal mass");
  q /= scale;

  Eigen::MatrixXd a = q.transpose();
  a.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.isInvertible()) {
    Eigen::VectorXd nu = lu.solve(rhs);
    const double residual = (nu.transpose() * q).cwiseAbs().maxCoeff();
    if (nu.allFinite() && nu.minCoeff() > -1e-12 && residual < 1e-12) {
      nu = nu.cwiseMax(0.0);
      return nu / nu.sum();
    }
  }

  // Power iteration on the uniformised chain I + Q / 2 (same fixed points).
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k) + 0.5 * q;
  Eigen::RowVectorXd nu = Eigen::RowVectorXd::Constant(k, 1.0 / static_cast<double>(k));
  for (int it = 0; it < 1'000'000; ++it) {
    Eigen::RowVectorXd next = nu * p;
    next /= next.sum();
    const double delta = (next - nu).cwiseAbs().maxCoeff();
    nu = next;
    if (delta < 1e-12) return nu.transpose();
  }
  throw NumericalError("stationary distribution did not converge");
}

namespace {

double required_payoff(const HptRow* row, bool building, const char* what) {
  if (!row) throw ConfigError(std::string("payoff table lacks the ") + what + " profile");
  const auto& u = building ? row->u_building : row->u_sharing;
  if (!u) throw ConfigError(std::string("payoff table has no payoff in the ") + what + " profile");
  return *u;
}

}  // namespace

double moran_fixation_probability(std::span<const double> gaps, double alpha) {
  return std::exp(log_moran_fixation(gaps, alpha));
}

AlphaRankResult alpharank(const HeuristicPayoffTable& hpt, double alpha, std::size_t population,
                          FixationModel model) {
  const std::size_t m = hpt.m;
  if (m < 2) throw ConfigError("meta-game needs at least 2 agents");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("ranking intensity must be positive");
  if (population < 2) throw ConfigError("population size must be at least 2");
  if (!hpt.find(0) || !hpt.find(m)) throw ConfigError("payoff table lacks a monomorphic profile");

  double to_building = 0.0, to_sharing = 0.0;
  double log_to_building = 0.0, log_to_sharing = 0.0;
  if (model == FixationModel::OneMutant) {
    // One builder among m - 1 sharers: building invades a sharing population.
    const HptRow* lone_builder = hpt.find(1);
    const double mutant_b = required_payoff(lone_builder, true, "one-builder");
    const double resident_s = required_payoff(lone_builder, false, "one-builder");
    // One sharer among m - 1 builders.
    const HptRow* lone_sharer = hpt.find(m - 1);
    const double mutant_s = required_payoff(lone_sharer, false, "one-sharer");
    const double resident_b = required_payoff(lone_sharer, true, "one-sharer");
    const double x_building = alpha * (mutant_b - resident_s);
    const double x_sharing = alpha * (mutant_s - resident_b);
    to_building = fixation_probability(x_building, population);
    to_sharing = fixation_probability(x_sharing, population);
    log_to_building = log_fixation(x_building, population);
    log_to_sharing = log_fixation(x_sharing, population);
  } else {
    if (population != m) throw ConfigError("full-profile fixation needs population == table size");
    std::vector<double> building_gaps, sharing_gaps;
    for (std::size_t k = 1; k < m; ++k) {
      const HptRow* b = hpt.find(k);  // k builders invading sharers
      building_gaps.push_back(required_payoff(b, true, "mixed") -
                              required_payoff(b, false, "mixed"));
      const HptRow* s = hpt.find(m - k);  // k sharers invading builders
      sharing_gaps.push_back(required_payoff(s, false, "mixed") -
                             required_payoff(s, true, "mixed"));
    }
    log_to_building = log_moran_fixation(building_gaps, alpha);
    log_to_sharing = log_moran_fixation(sharing_gaps, alpha);
    to_building = std::exp(log_to_building);
    to_sharing = std::exp(log_to_sharing);
  }

  AlphaRankResult r;
  r.alpha = alpha;
  r.population = population;
  r.model = model;
  r.transition << 1.0 - to_sharing, to_sharing, to_building, 1.0 - to_building;
  // nu depends only on the ratio of the two fixation probabilities; solving
  // the chain rescaled by the larger one keeps that ratio when both underflow.
  const double top = std::max(log_to_building, log_to_sharing);
  const double s_share = std::exp(log_to_sharing - top);
  const double s_build = std::exp(log_to_building - top);
  Eigen::Matrix2d rescaled;
  rescaled << 1.0 - s_share, s_share, s_build, 1.0 - s_build;
  r.stationary = stationary_distribution(rescaled);
  return r;
}

AlphaRankResult alpharank(const HeuristicPayoffTable& hpt, double alpha) {
  return alpharank(hpt, alpha, hpt.m);
}

std::vector<AlphaRankResult> intensity_sweep(const HeuristicPayoffTable& hpt,
                                             std::span<const double> alphas,
                                             std::size_t population, FixationModel model) {
  std::vector<AlphaRankResult> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(alpharank(hpt, a, population, model));
  return out;
}

}  // namespace rolesim

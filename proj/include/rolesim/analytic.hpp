#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rolesim/rng.hpp"

namespace rolesim {

/// Two builders with conflicting private values v1 ~ Exp(rate1),
/// v2 ~ Exp(rate2) and one searcher with a known bundle value who quotes
/// bid ratios beta31 / beta32 and receives rebates alpha13 / alpha23.
struct OneSidedMarket {
  double rate1 = 10.0;
  double rate2 = 10.0;
  double searcher_value = 0.1;
  double beta31 = 0.0;
  double beta32 = 0.0;
  double alpha13 = 0.0;
  double alpha23 = 0.0;

  double delta_beta() const { return beta31 - beta32; }
  /// Throws ConfigError on rates <= 0, negative value, ratios outside [0, 1]
  /// or rebates outside [0, 1).
  void validate() const;
};

/// Density of v1 - v2: K e^{-rate1 x} for x >= 0 and K e^{rate2 x} below,
/// K = rate1 rate2 / (rate1 + rate2).
double laplace_pdf(double x, double rate1, double rate2);
double laplace_cdf(double x, double rate1, double rate2);

/// Expected searcher payoff, integrating the piecewise payoff against the
/// Laplace density. The unbounded tails use exact antiderivatives; the
/// finite middle segment is integrated by adaptive Gauss-Kronrod.
/// Throws NumericalError if the quadrature error estimate stays above 1e-12.
double expected_searcher_payoff(const OneSidedMarket& market);

/// Closed-form d E[payoff] / d delta_beta with beta32 = 0. Throws ConfigError
/// if beta32 != 0 or delta_beta < 0.
double payoff_derivative_wrt_dbeta(const OneSidedMarket& market);

/// Realised searcher payoff for given builder values (ties go to builder 1).
double searcher_payoff(const OneSidedMarket& market, double v1, double v2);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

MonteCarloEstimate monte_carlo_searcher_payoff(const OneSidedMarket& market, std::size_t samples,
                                               Rng& rng);

struct VerificationConfig {
  std::size_t sign_points = 1000;
  std::size_t mc_points = 50;
  std::size_t mc_samples = 1'000'000;
  std::size_t fd_points = 100;
  double fd_step = 1e-5;
  std::uint64_t seed = 1;
};

struct VerificationReport {
  struct SignPoint {
    OneSidedMarket market;
    double derivative = 0.0;
  };
  struct McPoint {
    OneSidedMarket market;
    double quadrature = 0.0;
    MonteCarloEstimate mc;
    double z = 0.0;  ///< (mc - quadrature) / std_error
  };
  struct FdPoint {
    OneSidedMarket market;
    double closed_form = 0.0;
    double finite_difference = 0.0;
    double relative_error = 0.0;
  };

  VerificationConfig config;
  std::vector<SignPoint> signs;
  std::vector<McPoint> mc;
  std::vector<FdPoint> fd;

  std::size_t negative_signs() const;
  std::size_t mc_within(double sigmas) const;
  double max_fd_relative_error() const;
  std::string to_json() const;
};

/// Random valid parameter point: rates log-uniform on [0.5, 50], searcher
/// value log-uniform on [1e-3, 1], rebates uniform on [0, 1). With
/// zero_beta32 the point satisfies the derivative's precondition and
/// delta_beta is uniform on [0, 1].
OneSidedMarket random_market(Rng& rng, bool zero_beta32);

VerificationReport verify_analytic(const VerificationConfig& config);

}  // namespace rolesim

#include "rolesim/analytic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <json.hpp>

#include "rolesim/errors.hpp"

namespace rolesim {

void OneSidedMarket::validate() const {
  if (!(rate1 > 0.0) || !(rate2 > 0.0) || !std::isfinite(rate1) || !std::isfinite(rate2))
    throw ConfigError("exponential rates must be positive");
  if (!(searcher_value >= 0.0) || !std::isfinite(searcher_value))
    throw ConfigError("searcher bundle value must be non-negative");
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(beta31) || !unit(beta32)) throw ConfigError("bid ratios must be in [0, 1]");
  if (!(alpha13 >= 0.0 && alpha13 < 1.0) || !(alpha23 >= 0.0 && alpha23 < 1.0))
    throw ConfigError("rebate ratios must be in [0, 1)");
}

namespace {

double laplace_scale(double r1, double r2) { return r1 * r2 / (r1 + r2); }

// Integral of (c0 + c1 x) K e^{-r1 x} over [a, inf), a >= 0.
double upper_tail(double c0, double c1, double k, double r1, double a) {
  return k * std::exp(-r1 * a) * ((c0 + c1 * a) / r1 + c1 / (r1 * r1));
}

// Integral of (c0 + c1 x) K e^{r2 x} over (-inf, b], b <= 0.
double lower_tail(double c0, double c1, double k, double r2, double b) {
  return k * std::exp(r2 * b) * ((c0 + c1 * b) / r2 - c1 / (r2 * r2));
}

template <typename F>
double integrate_segment(F f, double a, double b) {
  if (a == b) return 0.0;
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-10, &error);
  const double tolerance = 1e-12 * std::max(1.0, std::abs(value));
  if (!std::isfinite(value) || error > tolerance)
    throw NumericalError(fmt::format(
        "quadrature on [{:.6e}, {:.6e}] did not converge: estimate {:.6e}, error {:.3e}", a, b,
        value, error));
  return value;
}

}  // namespace

double laplace_pdf(double x, double rate1, double rate2) {
  const double k = laplace_scale(rate1, rate2);
  return x >= 0.0 ? k * std::exp(-rate1 * x) : k * std::exp(rate2 * x);
}

double laplace_cdf(double x, double rate1, double rate2) {
  const double total = rate1 + rate2;
  return x >= 0.0 ? 1.0 - rate2 / total * std::exp(-rate1 * x)
                  : rate1 / total * std::exp(rate2 * x);
}

double expected_searcher_payoff(const OneSidedMarket& m) {
  m.validate();
  const double v3 = m.searcher_value;
  // A bundle without value never enters a block, so there is nothing to rebate.
  if (v3 == 0.0) return 0.0;
  const double db = m.delta_beta();
  const double k = laplace_scale(m.rate1, m.rate2);
  // Builder 1 wins for x = v1 - v2 >= t, builder 2 below.
  const double t = -db * v3;
  // Payoff is affine in x on each side: win1 = a0 + a1 x, win2 = b0 + b1 x.
  const double a0 = v3 - m.beta31 * v3 + m.alpha13 * db * v3;
  const double a1 = m.alpha13;
  const double b0 = v3 - m.beta32 * v3 - m.alpha23 * db * v3;
  const double b1 = -m.alpha23;

  auto density = [&](double x) { return laplace_pdf(x, m.rate1, m.rate2); };
  auto win1 = [&](double x) { return (a0 + a1 * x) * density(x); };
  auto win2 = [&](double x) { return (b0 + b1 * x) * density(x); };

  if (t >= 0.0) {
    return upper_tail(a0, a1, k, m.rate1, t) + integrate_segment(win2, 0.0, t) +
           lower_tail(b0, b1, k, m.rate2, 0.0);
  }
  return upper_tail(a0, a1, k, m.rate1, 0.0) + integrate_segment(win1, t, 0.0) +
         lower_tail(b0, b1, k, m.rate2, t);
}

double payoff_derivative_wrt_dbeta(const OneSidedMarket& m) {
  m.validate();
  if (m.beta32 != 0.0) throw ConfigError("derivative requires beta32 = 0");
  const double db = m.delta_beta();
  if (db < 0.0) throw ConfigError("derivative requires delta_beta >= 0");
  const double v3 = m.searcher_value;
  const double k = laplace_scale(m.rate1, m.rate2);
  const double decay = std::exp(-m.rate2 * db * v3);
  return k * (v3 * (m.alpha13 - 1.0) / m.rate1 +
              v3 * (m.alpha13 - 1.0) / m.rate2 * (-std::expm1(-m.rate2 * db * v3)) -
              v3 * v3 * db * decay - m.alpha23 * v3 * decay / m.rate2);
}

double searcher_payoff(const OneSidedMarket& m, double v1, double v2) {
  const double v3 = m.searcher_value;
  if (v3 == 0.0) return 0.0;
  const double bid1 = v1 + m.beta31 * v3;
  const double bid2 = v2 + m.beta32 * v3;
  if (bid1 >= bid2) return (1.0 - m.beta31) * v3 + m.alpha13 * (bid1 - bid2);
  return (1.0 - m.beta32) * v3 + m.alpha23 * (bid2 - bid1);
}

MonteCarloEstimate monte_carlo_searcher_payoff(const OneSidedMarket& m, std::size_t samples,
                                               Rng& rng) {
  m.validate();
  if (samples < 2) throw ConfigError("Monte Carlo needs at least 2 samples");
  // Welford accumulation.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double v1 = rng.exponential(m.rate1);
    const double v2 = rng.exponential(m.rate2);
    const double x = searcher_payoff(m, v1, v2);
    const double d = x - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (x - mean);
  }
  const auto n = static_cast<double>(samples);
  return {mean, std::sqrt(m2 / (n - 1.0) / n), samples};
}

OneSidedMarket random_market(Rng& rng, bool zero_beta32) {
  auto log_uniform = [&](double lo, double hi) {
    return lo * std::exp(rng.uniform() * std::log(hi / lo));
  };
  OneSidedMarket m;
  m.rate1 = log_uniform(0.5, 50.0);
  m.rate2 = log_uniform(0.5, 50.0);
  m.searcher_value = log_uniform(1e-3, 1.0);
  m.alpha13 = rng.uniform();
  m.alpha23 = rng.uniform();
  if (zero_beta32) {
    m.beta32 = 0.0;
    m.beta31 = rng.uniform();
  } else {
    m.beta31 = rng.uniform();
    m.beta32 = rng.uniform();
  }
  return m;
}

std::size_t VerificationReport::negative_signs() const {
  return static_cast<std::size_t>(std::count_if(
      signs.begin(), signs.end(), [](const SignPoint& p) { return p.derivative < 0.0; }));
}

std::size_t VerificationReport::mc_within(double sigmas) const {
  return static_cast<std::size_t>(std::count_if(
      mc.begin(), mc.end(), [sigmas](const McPoint& p) { return std::abs(p.z) <= sigmas; }));
}

double VerificationReport::max_fd_relative_error() const {
  double worst = 0.0;
  for (const auto& p : fd) worst = std::max(worst, p.relative_error);
  return worst;
}

namespace {
nlohmann::json market_json(const OneSidedMarket& m) {
  return {{"lambda1", m.rate1},  {"lambda2", m.rate2},  {"v3", m.searcher_value},
          {"beta31", m.beta31},  {"beta32", m.beta32},  {"alpha13", m.alpha13},
          {"alpha23", m.alpha23}};
}
}  // namespace

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"sign_points", config.sign_points}, {"mc_points", config.mc_points},
                 {"mc_samples", config.mc_samples},   {"fd_points", config.fd_points},
                 {"fd_step", config.fd_step},         {"seed", config.seed}};
  j["summary"] = {{"derivative_negative", negative_signs()},
                  {"derivative_points", signs.size()},
                  {"mc_within_3sigma", mc_within(3.0)},
                  {"mc_points", mc.size()},
                  {"fd_max_relative_error", max_fd_relative_error()}};
  auto& sj = j["derivative_signs"] = nlohmann::json::array();
  for (const auto& p : signs) {
    auto row = market_json(p.market);
    row["derivative"] = p.derivative;
    sj.push_back(row);
  }
  auto& mj = j["quadrature_vs_mc"] = nlohmann::json::array();
  for (const auto& p : mc) {
    auto row = market_json(p.market);
    row["quadrature"] = p.quadrature;
    row["mc_mean"] = p.mc.mean;
    row["mc_std_error"] = p.mc.std_error;
    row["z"] = p.z;
    mj.push_back(row);
  }
  auto& fj = j["closed_form_vs_fd"] = nlohmann::json::array();
  for (const auto& p : fd) {
    auto row = market_json(p.market);
    row["closed_form"] = p.closed_form;
    row["finite_difference"] = p.finite_difference;
    row["relative_error"] = p.relative_error;
    fj.push_back(row);
  }
  return j.dump(2);
}

VerificationReport verify_analytic(const VerificationConfig& config) {
  VerificationReport report;
  report.config = config;

  Rng grid(derive_seed(config.seed, 1));
  for (std::size_t i = 0; i < config.sign_points; ++i) {
    const auto m = random_market(grid, true);
    report.signs.push_back({m, payoff_derivative_wrt_dbeta(m)});
  }

  Rng mc_grid(derive_seed(config.seed, 2));
  for (std::size_t i = 0; i < config.mc_points; ++i) {
    const auto m = random_market(mc_grid, false);
    Rng sampler(derive_seed(config.seed, 3, i));
    VerificationReport::McPoint p{m, expected_searcher_payoff(m),
                                  monte_carlo_searcher_payoff(m, config.mc_samples, sampler), 0.0};
    p.z = p.mc.std_error > 0.0 ? (p.mc.mean - p.quadrature) / p.mc.std_error : 0.0;
    report.mc.push_back(p);
  }

  Rng fd_grid(derive_seed(config.seed, 4));
  const double h = config.fd_step;
  for (std::size_t i = 0; i < config.fd_points; ++i) {
    auto m = random_market(fd_grid, true);
    // Keep both stencil points inside the valid range delta_beta in [0, 1].
    m.beta31 = std::clamp(m.beta31, 2.0 * h, 1.0 - 2.0 * h);
    auto lo = m, hi = m;
    lo.beta31 -= h;
    hi.beta31 += h;
    const double fd = (expected_searcher_payoff(hi) - expected_searcher_payoff(lo)) / (2.0 * h);
    const double cf = payoff_derivative_wrt_dbeta(m);
    report.fd.push_back({m, cf, fd, std::abs(fd - cf) / std::abs(cf)});
  }
  return report;
}

}  // namespace rolesim

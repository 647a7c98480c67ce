#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace omm::model {

/// Affine mean-reverting variance drift a(nu) = kappa * (theta - nu).
struct MeanReversion {
  double kappa = 0.0;  // 1/year
  double theta = 0.0;  // 1/year

  double operator()(double nu) const noexcept { return kappa * (theta - nu); }
};

struct StochVolInputs {
  double mu = 0.0;   // spot drift under P
  double xi = 0.0;   // vol-of-vol
  double rho = 0.0;  // spot/variance correlation
  MeanReversion drift_p;
  MeanReversion drift_q;
};

/// Validated stochastic-volatility constants under both measures. Construction
/// rejects rho outside (-1, 1), non-positive xi/kappa/theta, and any Feller
/// violation 2*kappa*theta <= xi^2.
class StochVolParams {
 public:
  explicit StochVolParams(const StochVolInputs& in);

  const StochVolInputs& inputs() const noexcept { return in_; }
  double mu() const noexcept { return in_.mu; }
  double xi() const noexcept { return in_.xi; }
  double rho() const noexcept { return in_.rho; }
  const MeanReversion& drift_p() const noexcept { return in_.drift_p; }
  const MeanReversion& drift_q() const noexcept { return in_.drift_q; }

  /// a_P(nu) - a_Q(nu).
  double drift_gap(double nu) const noexcept { return in_.drift_p(nu) - in_.drift_q(nu); }
  bool same_drifts() const noexcept {
    return in_.drift_p.kappa == in_.drift_q.kappa && in_.drift_p.theta == in_.drift_q.theta;
  }

 private:
  StochVolInputs in_;
};

enum class Measure { P, Q };
enum class OptionKind { Call, Put };

struct OptionSpec {
  double strike = 0.0;    // currency
  double maturity = 0.0;  // years
  OptionKind kind = OptionKind::Call;

  double payoff(double spot) const noexcept;
  void validate() const;
};

struct MarketState {
  double spot = 0.0;
  double variance = 0.0;
  double time = 0.0;

  void validate() const;
};

struct McSpec {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 100;
  std::uint64_t seed = 1;
};

/// Monte-Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

class PathEnsemble {
 public:
  PathEnsemble(std::size_t n_paths, std::size_t n_steps, double horizon);

  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  double dt() const noexcept { return dt_; }

  std::span<const double> spot(std::size_t path) const noexcept {
    return {spot_.data() + path * (n_steps_ + 1), n_steps_ + 1};
  }
  std::span<const double> variance(std::size_t path) const noexcept {
    return {var_.data() + path * (n_steps_ + 1), n_steps_ + 1};
  }
  std::span<double> spot(std::size_t path) noexcept {
    return {spot_.data() + path * (n_steps_ + 1), n_steps_ + 1};
  }
  std::span<double> variance(std::size_t path) noexcept {
    return {var_.data() + path * (n_steps_ + 1), n_steps_ + 1};
  }

  bool operator==(const PathEnsemble&) const = default;

 private:
  std::size_t n_paths_;
  std::size_t n_steps_;
  double dt_;
  std::vector<double> spot_;
  std::vector<double> var_;
};

// ---------------------------------------------------------------------------
// Path kernels

/// One full-truncation Euler step: log-Euler for the spot, Euler for the
/// variance with nu^+ inside drift and diffusion. The Brownian pair is built
/// by Cholesky from two independent normals.
struct EulerStep {
  double drift_s;  // mu under P, 0 under Q
  double kappa;
  double theta;
  double xi;
  double rho;
  double rho_bar;  // sqrt(1 - rho^2)
  double dt;
  double sqrt_dt;

  EulerStep(const StochVolParams& params, Measure measure, double dt);

  /// Advances (log spot, raw variance) in place given two independent normals.
  void advance(double& log_spot, double& nu, double z1, double z2) const noexcept;
};

enum class Execution { Serial, Parallel };

PathEnsemble simulate_paths(const StochVolParams& params, Measure measure, const MarketState& initial,
                            double horizon, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed,
                            Execution exec = Execution::Parallel);

struct TerminalSample {
  double spot;
  double variance;
};

/// Terminal (S_T, nu_T^+) only, without storing paths.
std::vector<TerminalSample> simulate_terminal(const StochVolParams& params, Measure measure,
                                              const MarketState& initial, double horizon, const McSpec& mc,
                                              Execution exec = Execution::Parallel);

// ---------------------------------------------------------------------------
// Pricing

/// Risk-neutral MC price (zero rates) and sample standard error.
Estimate price_option(const OptionSpec& option, const MarketState& initial, const StochVolParams& params,
                      const McSpec& mc, Execution exec = Execution::Parallel);

/// Prices several options sharing one maturity from a single ensemble.
std::vector<Estimate> price_options(std::span<const OptionSpec> options, const MarketState& initial,
                                    const StochVolParams& params, const McSpec& mc,
                                    Execution exec = Execution::Parallel);

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Semi-analytic Heston price under Q by Fourier inversion (Lewis
/// single-integral form, "little trap" characteristic function). Absolute
/// integration tolerance 1e-6 on price; failure to reach it throws
/// IntegrationError.
double heston_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params);

/// E_Q[exp(i u log(S_T/S_t))] for complex u.
std::complex<double> heston_char_fn(std::complex<double> u, double tau, double variance,
                                    const StochVolParams& params);

inline constexpr double kDefaultVegaBump = 1e-2;

/// Central difference in sqrt(nu) of the closed-form price.
double vega_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                        double bump = kDefaultVegaBump);

/// Central difference in sqrt(nu) of the MC price with common random numbers.
Estimate vega_mc(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                 const McSpec& mc, double bump = kDefaultVegaBump, Execution exec = Execution::Parallel);

/// Central difference in spot of the closed-form price, bump rel_bump * S.
double delta_closed_form(const OptionSpec& option, const MarketState& state, const StochVolParams& params,
                         double rel_bump = 1e-3);

// ---------------------------------------------------------------------------
// Black-Scholes (zero rates)

double norm_cdf(double x) noexcept;
double norm_pdf(double x) noexcept;
double bs_price(OptionKind kind, double spot, double strike, double tau, double sigma) noexcept;
double bs_vega(double spot, double strike, double tau, double sigma) noexcept;

class OutOfBandError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Black-Scholes implied volatility by Newton with a bisection safeguard.
/// Throws OutOfBandError if price is outside the no-arbitrage band.
double implied_vol(double price, const OptionSpec& option, double spot, double time = 0.0);

}  // namespace omm::model

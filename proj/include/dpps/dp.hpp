#pragma once

// Dirichlet-process random measures: truncated stick-breaking prior draws,
// the iterative conjugate posterior, the Bayesian bootstrap, and a few
// statistics of finite atom measures.

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dpps/random.hpp"

namespace dpps {

inline constexpr double kDefaultAlpha = 2.0;
inline constexpr std::size_t kDefaultTruncation = 100;

struct BetaDist {
  double a;
  double b;
};
struct GaussianDist {
  double mu;
  double sigma;
};
struct UniformDist {
  double lo;
  double hi;
};
struct EmpiricalAtoms {
  std::vector<double> points;
};

/// Base measure F0 of a DP. Parameters are validated on construction.
class BaseMeasure {
 public:
  using Kind = std::variant<BetaDist, GaussianDist, UniformDist, EmpiricalAtoms>;

  BaseMeasure(Kind kind);  // NOLINT(google-explicit-constructor)

  static BaseMeasure uniform01() { return BaseMeasure(BetaDist{1.0, 1.0}); }

  double sample(Rng& rng) const;
  double mean() const;
  /// Interval holding essentially all of the mass (Gaussian: mu +/- 4 sigma).
  std::pair<double, double> range() const;
  std::string describe() const;

  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
};

struct DPParams {
  DPParams(double alpha, BaseMeasure base, std::size_t truncation = kDefaultTruncation);

  double alpha;
  BaseMeasure base;
  std::size_t truncation;
};

struct Atom {
  double weight;
  double location;
};

/// Finite weighted-atom probability measure. Weights are nonnegative and
/// sum to one within 1e-12.
class RandomMeasure {
 public:
  RandomMeasure() = default;
  /// Validates the weights; if the sum is off by more than 1e-12 the last
  /// weight absorbs the residual (underflow in long stick products).
  explicit RandomMeasure(std::vector<Atom> atoms);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double total_weight() const;
  /// P(X <= x).
  double cdf(double x) const;

 private:
  std::vector<Atom> atoms_;
};

/// Per-arm DP posterior state. The posterior DP(alpha + n, (n F_n + alpha F0)
/// / (alpha + n)) is implied by the frozen prior plus the raw observations.
class DPArmState {
 public:
  explicit DPArmState(DPParams params);

  void observe(double reward) { observations_.push_back(reward); }

  const DPParams& params() const { return params_; }
  std::span<const double> observations() const { return observations_; }
  std::size_t n() const { return observations_.size(); }
  double posterior_concentration() const {
    return params_.alpha + static_cast<double>(observations_.size());
  }

 private:
  DPParams params_;
  std::vector<double> observations_;
};

/// Truncated stick-breaking draw from DP(alpha, F0) with exactly N atoms.
/// q_i = V_i prod_{j<i}(1 - V_j) for i < N, and q_N takes the residual
/// prod_{j<N}(1 - V_j), so the weights sum to one.
RandomMeasure stick_breaking_prior(const DPParams& params, Rng& rng);

/// Mean of a stick_breaking_prior draw without materializing the atoms.
/// Consumes the generator exactly like stick_breaking_prior.
double stick_breaking_prior_mean(const DPParams& params, Rng& rng);

/// Draw from the DP posterior of `state`. Starts from a fresh prior draw Q0
/// and applies Q_i = V_i delta_{X_i} + (1 - V_i) Q_{i-1}, i = 1..n, with
/// V_i ~ Beta(1, alpha + i - 1). Prior atoms come first, then observations.
RandomMeasure posterior_draw(const DPArmState& state, Rng& rng);

/// measure_mean(posterior_draw(state, rng)) in one O(n + N) pass with no
/// allocation. Consumes the generator exactly like posterior_draw.
double posterior_mean_draw(const DPArmState& state, Rng& rng);

/// Shape b of the i-th (1-based) posterior stick V_i ~ Beta(1, b).
inline double posterior_stick_shape(double alpha, std::size_t i) {
  return alpha + static_cast<double>(i) - 1.0;
}

/// Dirichlet(1, ..., 1) weights over the observations, built by normalizing
/// iid standard exponentials. Throws std::invalid_argument on empty input.
RandomMeasure bayesian_bootstrap_draw(std::span<const double> observations, Rng& rng);

/// measure_mean(bayesian_bootstrap_draw(...)) without allocation; same
/// generator consumption.
double bayesian_bootstrap_mean_draw(std::span<const double> observations, Rng& rng);

double measure_mean(const RandomMeasure& m);

struct TruncationTail {
  double expected_tail_power;  ///< E[T_N] = E[(sum_{i>=N} q_i)^r]
  double expected_power_sum;   ///< E[U_N] = E[sum_{i>=N} q_i^r]
};

/// Expected mass neglected by truncating the stick at N atoms.
TruncationTail expected_truncation_tail(double alpha, double r, std::size_t truncation);

struct CdfBand {
  double lower;
  double upper;
};

/// Pointwise quantiles of posterior CDFs. Draws `n_draws` posterior
/// measures, evaluates each CDF on `grid` (sorted ascending) and returns,
/// per grid point, one value per requested probability. Quantiles use
/// linear interpolation between order statistics.
std::vector<std::vector<double>> posterior_cdf_quantiles(std::span<const double> observations,
                                                         const DPParams& params,
                                                         std::size_t n_draws,
                                                         std::span<const double> grid,
                                                         std::span<const double> probs, Rng& rng);

std::vector<CdfBand> posterior_cdf_envelope(std::span<const double> observations,
                                            const DPParams& params, std::size_t n_draws,
                                            std::span<const double> grid,
                                            std::pair<double, double> quantiles, Rng& rng);

/// Linear-interpolation sample quantile of unsorted data, p in [0, 1].
double sample_quantile(std::vector<double> values, double p);

}  // namespace dpps

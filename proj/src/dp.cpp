#include "dpps/dp.hpp"

#include "stick_kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpps {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const BaseMeasure::Kind& kind) {
  std::visit(Overloaded{
                 [](const BetaDist& d) {
                   if (!(d.a > 0.0) || !(d.b > 0.0))
                     throw std::invalid_argument("beta base measure needs a > 0 and b > 0");
                 },
                 [](const GaussianDist& d) {
                   if (!std::isfinite(d.mu) || !(d.sigma > 0.0))
                     throw std::invalid_argument("gaussian base measure needs sigma > 0");
                 },
                 [](const UniformDist& d) {
                   if (!(d.lo < d.hi))
                     throw std::invalid_argument("uniform base measure needs lo < hi");
                 },
                 [](const EmpiricalAtoms& d) {
                   if (d.points.empty())
                     throw std::invalid_argument("empirical base measure needs at least one point");
                 },
             },
             kind);
}

// Walks the truncated stick, handing each (weight, location) to `emit` in
// order. Both the materializing and the mean-only prior draws go through
// here so they consume the generator identically: first the N - 1 stick
// uniforms, then the N locations.
template <class Emit>
void walk_stick(const DPParams& params, Rng& rng, Emit&& emit) {
  thread_local std::vector<double> weights;
  thread_local std::vector<double> u;
  thread_local std::vector<double> keep;
  const std::size_t sticks = params.truncation - 1;
  weights.resize(params.truncation);
  u.resize(sticks);
  keep.resize(sticks);
  detail::fill_uniform_open(rng, u);
  detail::keep_factors_constant(u, params.alpha, keep);
  double remaining = 1.0;
  for (std::size_t i = 0; i < sticks; ++i) {
    weights[i] = (1.0 - keep[i]) * remaining;
    remaining *= keep[i];
  }
  weights[sticks] = remaining;
  for (std::size_t i = 0; i < params.truncation; ++i) emit(weights[i], params.base.sample(rng));
}

// Kept fractions 1 - V_i of the posterior sticks, i = first..first+out.size()-1
// (0-based), drawn block by block.
void posterior_keep_block(double alpha, std::size_t first, Rng& rng, std::span<double> out) {
  thread_local std::vector<double> u;
  u.resize(out.size());
  detail::fill_uniform_open(rng, u);
  detail::keep_factors_posterior(u, alpha, first, out);
}

}  // namespace

BaseMeasure::BaseMeasure(Kind kind) : kind_(std::move(kind)) { validate(kind_); }

double BaseMeasure::sample(Rng& rng) const {
  return std::visit(Overloaded{
                        [&](const BetaDist& d) { return beta(d.a, d.b, rng); },
                        [&](const GaussianDist& d) { return normal(d.mu, d.sigma, rng); },
                        [&](const UniformDist& d) { return d.lo + (d.hi - d.lo) * uniform_open(rng); },
                        [&](const EmpiricalAtoms& d) {
                          std::uniform_int_distribution<std::size_t> pick(0, d.points.size() - 1);
                          return d.points[pick(rng)];
                        },
                    },
                    kind_);
}

double BaseMeasure::mean() const {
  return std::visit(Overloaded{
                        [](const BetaDist& d) { return d.a / (d.a + d.b); },
                        [](const GaussianDist& d) { return d.mu; },
                        [](const UniformDist& d) { return 0.5 * (d.lo + d.hi); },
                        [](const EmpiricalAtoms& d) {
                          double s = 0.0;
                          for (double x : d.points) s += x;
                          return s / static_cast<double>(d.points.size());
                        },
                    },
                    kind_);
}

std::pair<double, double> BaseMeasure::range() const {
  return std::visit(Overloaded{
                        [](const BetaDist&) { return std::pair{0.0, 1.0}; },
                        [](const GaussianDist& d) {
                          return std::pair{d.mu - 4.0 * d.sigma, d.mu + 4.0 * d.sigma};
                        },
                        [](const UniformDist& d) { return std::pair{d.lo, d.hi}; },
                        [](const EmpiricalAtoms& d) {
                          auto [lo, hi] = std::minmax_element(d.points.begin(), d.points.end());
                          return std::pair{*lo, *hi};
                        },
                    },
                    kind_);
}

std::string BaseMeasure::describe() const {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const BetaDist& d) { os << "beta " << d.a << ' ' << d.b; },
                 [&](const GaussianDist& d) { os << "gaussian " << d.mu << ' ' << d.sigma; },
                 [&](const UniformDist& d) { os << "uniform " << d.lo << ' ' << d.hi; },
                 [&](const EmpiricalAtoms& d) { os << "empirical (" << d.points.size() << " points)"; },
             },
             kind_);
  return os.str();
}

DPParams::DPParams(double alpha_, BaseMeasure base_, std::size_t truncation_)
    : alpha(alpha_), base(std::move(base_)), truncation(truncation_) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("DP concentration alpha must be positive and finite");
  if (truncation < 1) throw std::invalid_argument("DP truncation must be at least 1");
}

RandomMeasure::RandomMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("random measure needs at least one atom");
  double sum = 0.0;
  for (const Atom& a : atoms_) {
    if (!(a.weight >= 0.0)) throw std::invalid_argument("random measure weights must be nonnegative");
    sum += a.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    Atom& last = atoms_.back();
    last.weight = std::max(0.0, last.weight + (1.0 - sum));
  }
}

double RandomMeasure::total_weight() const {
  double sum = 0.0;
  for (const Atom& a : atoms_) sum += a.weight;
  return sum;
}

double RandomMeasure::cdf(double x) const {
  double mass = 0.0;
  for (const Atom& a : atoms_)
    if (a.location <= x) mass += a.weight;
  return std::clamp(mass, 0.0, 1.0);
}

DPArmState::DPArmState(DPParams params) : params_(std::move(params)) {}

RandomMeasure stick_breaking_prior(const DPParams& params, Rng& rng) {
  std::vector<Atom> atoms;
  atoms.reserve(params.truncation);
  walk_stick(params, rng, [&](double w, double z) { atoms.push_back({w, z}); });
  return RandomMeasure(std::move(atoms));
}

double stick_breaking_prior_mean(const DPParams& params, Rng& rng) {
  double mean = 0.0;
  walk_stick(params, rng, [&](double w, double z) { mean += w * z; });
  return mean;
}

RandomMeasure posterior_draw(const DPArmState& state, Rng& rng) {
  const auto& params = state.params();
  const auto obs = state.observations();
  const std::size_t n = obs.size();

  std::vector<Atom> atoms;
  atoms.reserve(params.truncation + n);
  walk_stick(params, rng, [&](double w, double z) { atoms.push_back({w, z}); });

  std::vector<double> keep(n);
  for (std::size_t i = 0; i < n; i += detail::kStickBlock) {
    const std::size_t len = std::min(detail::kStickBlock, n - i);
    posterior_keep_block(params.alpha, i, rng, std::span(keep).subspan(i, len));
  }
  // Observation i keeps V_i times everything applied after it.
  std::vector<double> obs_weight(n);
  double tail = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    obs_weight[i] = (1.0 - keep[i]) * tail;
    tail *= keep[i];
  }
  for (Atom& a : atoms) a.weight *= tail;
  for (std::size_t i = 0; i < n; ++i) atoms.push_back({obs_weight[i], obs[i]});
  return RandomMeasure(std::move(atoms));
}

double posterior_mean_draw(const DPArmState& state, Rng& rng) {
  const auto& params = state.params();
  double mean = stick_breaking_prior_mean(params, rng);
  const auto obs = state.observations();
  std::array<double, detail::kStickBlock> keep{};
  for (std::size_t i = 0; i < obs.size(); i += detail::kStickBlock) {
    const std::size_t len = std::min(detail::kStickBlock, obs.size() - i);
    posterior_keep_block(params.alpha, i, rng, std::span(keep).first(len));
    for (std::size_t j = 0; j < len; ++j) {
      const double x = obs[i + j];
      mean = x + keep[j] * (mean - x);
    }
  }
  return mean;
}

RandomMeasure bayesian_bootstrap_draw(std::span<const double> observations, Rng& rng) {
  if (observations.empty()) throw std::invalid_argument("bootstrap requires data");
  const std::size_t n = observations.size();
  std::vector<double> u(n);
  std::vector<double> e(n);
  detail::fill_uniform_open(rng, u);
  detail::exponentials(u, e);
  double total = 0.0;
  for (double x : e) total += x;
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) atoms.push_back({e[i] / total, observations[i]});
  return RandomMeasure(std::move(atoms));
}

double bayesian_bootstrap_mean_draw(std::span<const double> observations, Rng& rng) {
  if (observations.empty()) throw std::invalid_argument("bootstrap requires data");
  std::array<double, detail::kStickBlock> u{};
  std::array<double, detail::kStickBlock> e{};
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < observations.size(); i += detail::kStickBlock) {
    const std::size_t len = std::min(detail::kStickBlock, observations.size() - i);
    detail::fill_uniform_open(rng, std::span(u).first(len));
    detail::exponentials(std::span(u).first(len), std::span(e).first(len));
    for (std::size_t j = 0; j < len; ++j) {
      total += e[j];
      weighted += e[j] * observations[i + j];
    }
  }
  return weighted / total;
}

double measure_mean(const RandomMeasure& m) {
  double mean = 0.0;
  for (const Atom& a : m.atoms()) mean += a.weight * a.location;
  return mean;
}

TruncationTail expected_truncation_tail(double alpha, double r, std::size_t truncation) {
  if (!(alpha > 0.0) || !(r > 0.0) || truncation < 1)
    throw std::invalid_argument("truncation tail needs alpha > 0, r > 0, N >= 1");
  const double tail = std::pow(alpha / (alpha + r), static_cast<double>(truncation - 1));
  const double gamma_ratio = std::exp(std::lgamma(r) + std::lgamma(alpha + 1.0) - std::lgamma(alpha + r));
  return {tail, tail * gamma_ratio};
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::vector<double>> posterior_cdf_quantiles(std::span<const double> observations,
                                                         const DPParams& params,
                                                         std::size_t n_draws,
                                                         std::span<const double> grid,
                                                         std::span<const double> probs, Rng& rng) {
  if (grid.empty()) throw std::invalid_argument("cdf envelope needs a nonempty grid");
  if (n_draws < 1) throw std::invalid_argument("cdf envelope needs at least one draw");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("cdf envelope grid must be sorted ascending");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile probabilities must lie in [0, 1]");

  DPArmState state(params);
  for (double x : observations) state.observe(x);

  // cdfs[g][d]: CDF of draw d at grid point g.
  std::vector<std::vector<double>> cdfs(grid.size(), std::vector<double>(n_draws));
  for (std::size_t d = 0; d < n_draws; ++d) {
    const RandomMeasure m = posterior_draw(state, rng);
    std::vector<Atom> atoms(m.atoms().begin(), m.atoms().end());
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    std::size_t next = 0;
    double mass = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (next < atoms.size() && atoms[next].location <= grid[g]) mass += atoms[next++].weight;
      cdfs[g][d] = std::clamp(mass, 0.0, 1.0);
    }
  }

  std::vector<std::vector<double>> out(grid.size(), std::vector<double>(probs.size()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double>& column = cdfs[g];
    std::sort(column.begin(), column.end());
    for (std::size_t q = 0; q < probs.size(); ++q) {
      const double pos = probs[q] * static_cast<double>(n_draws - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, n_draws - 1);
      out[g][q] = column[lo] + (pos - static_cast<double>(lo)) * (column[hi] - column[lo]);
    }
  }
  return out;
}

std::vector<CdfBand> posterior_cdf_envelope(std::span<const double> observations,
                                            const DPParams& params, std::size_t n_draws,
                                            std::span<const double> grid,
                                            std::pair<double, double> quantiles, Rng& rng) {
  auto [q_lo, q_hi] = quantiles;
  if (!(q_lo > 0.0 && q_hi < 1.0 && q_lo < q_hi))
    throw std::invalid_argument("envelope quantiles must satisfy 0 < lower < upper < 1");
  const double probs[] = {q_lo, q_hi};
  const auto q = posterior_cdf_quantiles(observations, params, n_draws, grid, probs, rng);
  std::vector<CdfBand> bands;
  bands.reserve(q.size());
  for (const auto& row : q) bands.push_back({row[0], row[1]});
  return bands;
}

}  // namespace dpps

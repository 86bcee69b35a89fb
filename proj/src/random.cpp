#include "dpps/random.hpp"

#include <cmath>
#include <stdexcept>

namespace dpps {

Rng make_stream(std::uint64_t master_seed, StreamDomain domain,
                std::uint64_t run_index, std::uint64_t id) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(master_seed), hi(master_seed),
                    static_cast<std::uint32_t>(domain),
                    lo(run_index), hi(run_index), lo(id), hi(id)};
  return Rng(seq);
}

double standard_exponential(Rng& rng) { return -std::log(uniform_open(rng)); }

double beta_one(double b, Rng& rng) {
  return -std::expm1(std::log(uniform_open(rng)) / b);
}

double gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

double beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
  if (a == 1.0 && b == 1.0) return uniform_open(rng);
  if (a == 1.0) return beta_one(b, rng);
  // Beta(a, 1) has CDF v^a.
  if (b == 1.0) return std::exp(std::log(uniform_open(rng)) / a);
  const double x = gamma(a, rng);
  const double y = gamma(b, rng);
  const double s = x + y;
  // Both shapes tiny: the gammas can underflow together.
  if (s == 0.0) return bernoulli(a / (a + b), rng) ? 1.0 : 0.0;
  return x / s;
}

double normal(double mu, double sigma, Rng& rng) {
  std::normal_distribution<double> dist(mu, sigma);
  return dist(rng);
}

bool bernoulli(double p, Rng& rng) { return uniform_open(rng) < p; }

std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng) {
  if (scores.empty()) throw std::invalid_argument("argmax of empty score vector");
  std::size_t best = 0;
  std::size_t ties = 1;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) {
      best = i;
      ties = 1;
    } else if (scores[i] == scores[best]) {
      ++ties;
      // Reservoir step: keep the newcomer with probability 1/ties.
      if (rng() % ties == 0) best = i;
    }
  }
  return best;
}

}  // namespace dpps

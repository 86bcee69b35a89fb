#pragma once

// Random-number primitives shared by every sampler in the library.
//
// All randomness flows through an explicit `Rng&` handle; nothing in the
// library owns a global generator. `std::mt19937_64` is fully specified by
// the standard, so a given seed produces the same raw stream everywhere.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace dpps {

using Rng = std::mt19937_64;

/// Stream domains keep agent, reward and environment-instance streams
/// disjoint even when they share a run index.
enum class StreamDomain : std::uint32_t {
  kAgent = 0,
  kArmReward = 1,
  kEnvInstance = 2,
  kGeneric = 3,
};

/// Seeds a generator from the tuple (master_seed, domain, run_index, id).
///
/// The four fields are fed verbatim, as six 32-bit words, into a
/// `std::seed_seq`; distinct tuples give distinct seed sequences, and
/// `seed_seq::generate` is specified exactly by the standard.
Rng make_stream(std::uint64_t master_seed, StreamDomain domain,
                std::uint64_t run_index, std::uint64_t id);

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
inline double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard exponential via inverse CDF.
double standard_exponential(Rng& rng);

/// Beta(1, b) via inverse CDF: V = 1 - U^(1/b), computed as -expm1(log(U)/b)
/// so that large b keeps full precision.
double beta_one(double b, Rng& rng);

/// General Beta(a, b). Uses the inverse-CDF shortcut when a or b is one,
/// otherwise the ratio of two Gamma variates.
double beta(double a, double b, Rng& rng);

double gamma(double shape, Rng& rng);

double normal(double mu, double sigma, Rng& rng);

bool bernoulli(double p, Rng& rng);

/// Index of the largest score; ties broken uniformly at random.
/// The generator is consulted only when a tie is actually encountered.
std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng);

}  // namespace dpps

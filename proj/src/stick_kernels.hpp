#pragma once

// Batched inner loops of the stick-breaking samplers. stick_kernels.cpp is
// compiled with vectorized math so that log/exp run through libmvec.

#include <cstddef>
#include <span>

#include "dpps/random.hpp"

namespace dpps::detail {

inline constexpr std::size_t kStickBlock = 256;

void fill_uniform_open(Rng& rng, std::span<double> out);

/// out[i] = u[i]^(1/shape): the kept fraction 1 - V of a Beta(1, shape) stick.
void keep_factors_constant(std::span<const double> u, double shape, std::span<double> out);

/// out[i] = u[i]^(1/(alpha + first + i)) for posterior sticks.
void keep_factors_posterior(std::span<const double> u, double alpha, std::size_t first,
                            std::span<double> out);

/// out[i] = -log(u[i]).
void exponentials(std::span<const double> u, std::span<double> out);

}  // namespace dpps::detail

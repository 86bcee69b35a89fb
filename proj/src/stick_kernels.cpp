#include "stick_kernels.hpp"

#include <cmath>

namespace dpps::detail {

void fill_uniform_open(Rng& rng, std::span<double> out) {
  for (double& v : out) v = uniform_open(rng);
}

void keep_factors_constant(std::span<const double> u, double shape, std::span<double> out) {
  const double inv = 1.0 / shape;
  const std::size_t n = u.size();
  const double* in = u.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(std::log(in[i]) * inv);
}

void keep_factors_posterior(std::span<const double> u, double alpha, std::size_t first,
                            std::span<double> out) {
  const std::size_t n = u.size();
  const double* in = u.data();
  double* dst = out.data();
  const double base = alpha + static_cast<double>(first);
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = std::exp(std::log(in[i]) / (base + static_cast<double>(i)));
}

void exponentials(std::span<const double> u, std::span<double> out) {
  const std::size_t n = u.size();
  const double* in = u.data();
  double* dst = out.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] = -std::log(in[i]);
}

}  // namespace dpps::detail

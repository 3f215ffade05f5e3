#include "hmmbw/rng.hpp"

#include <cmath>
#include <numbers>

namespace hmmbw {

double Rng::uniform_open() {
  // Top 53 bits, shifted by half an ulp so that neither 0 nor 1 occurs.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(uniform_open()); }

std::size_t Rng::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double target = uniform_open() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (target < cumulative) return i;
  }
  // Rounding left target at or beyond the final cumulative sum.
  return last_positive;
}

}  // namespace hmmbw

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace hmmbw {

/// Seedable generator used for every random draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distributions are implemented here rather than taken from
/// <random> because the standard distributions are implementation-defined,
/// so draws are reproducible across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in the open interval (0, 1), 53 bits of resolution.
  double uniform_open();

  /// Standard normal via Box-Muller (one draw per call, no caching).
  double normal();

  /// Exponential with rate 1; strictly positive.
  double exponential();

  /// Index drawn from a discrete distribution by inverse CDF. Zero-weight
  /// entries are never returned.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace hmmbw

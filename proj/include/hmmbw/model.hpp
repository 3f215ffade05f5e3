#pragma once

// Parameter types for a hidden Markov model lambda = (pi, a, b).
//
// States and symbols are 0-based everywhere: state i here is state i+1 in the
// usual 1-based textbook notation.

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "hmmbw/matrix.hpp"

namespace hmmbw {

/// Absolute tolerance on every probability sum.
inline constexpr double kProbabilitySumTolerance = 1e-9;

/// Smallest admissible Gaussian variance, in squared observation units.
inline constexpr double kDefaultVarianceFloor = 1e-6;

enum class EmissionKind { categorical, gaussian };

const char* to_string(EmissionKind kind);

struct InitialDistribution {
  std::vector<double> probs;
  bool operator==(const InitialDistribution&) const = default;
};

/// probs(i, j) = probability of moving from state i to state j.
struct TransitionMatrix {
  Matrix probs;
  bool operator==(const TransitionMatrix&) const = default;
};

/// probs(i, m) = probability that state i emits symbol m.
struct CategoricalEmission {
  Matrix probs;
  std::size_t n_symbols() const { return probs.cols(); }
  bool operator==(const CategoricalEmission&) const = default;
};

/// One univariate normal per state.
struct GaussianEmission {
  std::vector<double> means;
  std::vector<double> variances;
  bool operator==(const GaussianEmission&) const = default;
};

using EmissionModel = std::variant<CategoricalEmission, GaussianEmission>;

EmissionKind kind_of(const EmissionModel& emission);

struct HmmParameters {
  InitialDistribution pi;
  TransitionMatrix trans;
  EmissionModel emission;

  std::size_t n_states() const { return pi.probs.size(); }
  EmissionKind emission_kind() const { return kind_of(emission); }

  bool operator==(const HmmParameters&) const = default;
};

/// Returns `params` unchanged if every invariant holds, otherwise throws
/// ValidationError naming the offending component and index.
const HmmParameters& validate(const HmmParameters& params,
                              double variance_floor = kDefaultVarianceFloor);

/// Emission family requested from random_init.
struct EmissionSpec {
  EmissionKind kind = EmissionKind::categorical;
  std::size_t n_symbols = 0;  // categorical only

  static EmissionSpec categorical(std::size_t n_symbols) {
    return {EmissionKind::categorical, n_symbols};
  }
  static EmissionSpec gaussian() { return {EmissionKind::gaussian, 0}; }
};

/// Seeded random parameters with strictly positive probabilities. Every row is
/// a flat-Dirichlet draw (normalized exponentials); Gaussian means are standard
/// normal draws and variances start at 1.
HmmParameters random_init(std::size_t n_states, const EmissionSpec& spec, std::uint64_t seed);

}  // namespace hmmbw

#pragma once

// Exact reference computations by enumerating all N^T hidden paths.
//
// Nothing here calls into the forward-backward code; every quantity is a
// direct sum of joint path probabilities p(O, Q | lambda). For Gaussian
// emissions these are densities, so "likelihood" may exceed 1.

#include <cstddef>
#include <vector>

#include "hmmbw/inference.hpp"
#include "hmmbw/matrix.hpp"
#include "hmmbw/model.hpp"

namespace hmmbw::oracle {

/// Largest number of paths the oracle will enumerate.
inline constexpr std::size_t kMaxPaths = 1'000'000;

struct ExactPosteriors {
  double likelihood = 0.0;
  Matrix gamma;
  std::vector<Matrix> xi;
};

/// Joint probability (or density) of one path, straight product.
double path_joint(const HmmParameters& params, const ObservationSequence& obs,
                  const std::vector<std::size_t>& path);

double enumerate_likelihood(const HmmParameters& params, const ObservationSequence& obs);

ExactPosteriors enumerate_posteriors(const HmmParameters& params, const ObservationSequence& obs);

/// Q(new, prev) = sum_k sum_paths p(path | O^(k), prev) log p(O^(k), path | new).
/// Returns -infinity when a path with positive posterior is impossible under
/// `params_new`.
double enumerate_q(const HmmParameters& params_new, const HmmParameters& params_prev,
                   const std::vector<ObservationSequence>& sequences);

/// Entropy of the path posterior, summed over sequences.
double path_posterior_entropy(const HmmParameters& params,
                              const std::vector<ObservationSequence>& sequences);

/// Highest-probability path by enumeration; ties go to the lexicographically
/// smallest path.
std::vector<std::size_t> enumerate_best_path(const HmmParameters& params,
                                             const ObservationSequence& obs);

}  // namespace hmmbw::oracle

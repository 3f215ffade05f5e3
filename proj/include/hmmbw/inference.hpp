#pragma once

// Scaled forward-backward recursions, posteriors, Viterbi decoding and
// ancestral sampling for a single observation sequence.
//
// Scaling convention: alpha_hat[t] is the forward row normalized to sum to 1
// and scales[t] = c_t is the reciprocal of the unnormalized row sum, so that
// log p(O | lambda) = -sum_t log c_t. The backward variables are rescaled with
// the same c_t sequence; beta_hat[T-1][i] = c_{T-1}.

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "hmmbw/matrix.hpp"
#include "hmmbw/model.hpp"
#include "hmmbw/rng.hpp"

namespace hmmbw {

/// One observation sequence o_0 .. o_{T-1}, T >= 1.
class ObservationSequence {
 public:
  static ObservationSequence categorical(std::vector<int> symbols);
  static ObservationSequence gaussian(std::vector<double> values);

  EmissionKind kind() const;
  std::size_t size() const;

  /// Throw ValidationError when the sequence is of the other kind.
  const std::vector<int>& symbols() const;
  const std::vector<double>& values() const;

  bool operator==(const ObservationSequence&) const = default;

 private:
  explicit ObservationSequence(std::variant<std::vector<int>, std::vector<double>> data)
      : data_(std::move(data)) {}

  std::variant<std::vector<int>, std::vector<double>> data_;
};

/// Throws InferenceError if `obs` cannot be evaluated against `params`
/// (kind mismatch, symbol outside [0, M)).
void check_compatible(const HmmParameters& params, const ObservationSequence& obs);

struct ForwardResult {
  Matrix alpha_hat;            // T x N, rows sum to 1
  std::vector<double> scales;  // c_t > 0
  double log_likelihood = 0.0;
};

struct ScaledTrellis {
  Matrix alpha_hat;
  Matrix beta_hat;
  std::vector<double> scales;
  double log_likelihood = 0.0;
};

struct PosteriorStats {
  Matrix gamma;             // T x N, gamma(t, i) = p(q_t = i | O)
  std::vector<Matrix> xi;   // T-1 entries of N x N, xi[t](i, j) = p(q_t = i, q_{t+1} = j | O)
  double log_likelihood = 0.0;
};

ForwardResult forward(const HmmParameters& params, const ObservationSequence& obs);

Matrix backward(const HmmParameters& params, const ObservationSequence& obs,
                const std::vector<double>& scales);

ScaledTrellis forward_backward(const HmmParameters& params, const ObservationSequence& obs);

PosteriorStats posteriors(const HmmParameters& params, const ObservationSequence& obs);

/// log p(O | lambda).
double log_likelihood(const HmmParameters& params, const ObservationSequence& obs);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double log_joint = 0.0;
};

/// Most probable state path; ties go to the lower state index.
ViterbiResult viterbi(const HmmParameters& params, const ObservationSequence& obs);

struct SampleResult {
  std::vector<std::size_t> states;
  ObservationSequence obs;
};

SampleResult sample(const HmmParameters& params, std::size_t length, std::uint64_t seed);

/// Draws from a caller-owned generator, for sampling several sequences from
/// one stream.
SampleResult sample(const HmmParameters& params, std::size_t length, Rng& rng);

}  // namespace hmmbw

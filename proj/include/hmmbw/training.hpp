#pragma once

// Baum-Welch re-estimation over K independent observation sequences.
//
// The expected complete-data log-likelihood splits into three terms, one per
// parameter block (pi, a, b). Each term is maximized on its own by a
// closed-form update from pooled posterior statistics:
//   pi_i  proportional to sum_k p(q_0^(k) = i | O^(k))
//   a_ij  = sum_k sum_t xi_t^(k)(i, j) / (row normalizer)
//   b     = one EM step of an N-component mixture weighted by gamma.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "hmmbw/error.hpp"
#include "hmmbw/inference.hpp"
#include "hmmbw/matrix.hpp"
#include "hmmbw/model.hpp"

namespace hmmbw {

/// counts(i, m) = expected number of times state i emitted symbol m.
struct CategoricalEmissionStats {
  Matrix counts;
};

/// Per-state weighted moments: sum gamma, sum gamma*o, sum gamma*o^2.
struct GaussianEmissionStats {
  std::vector<double> weight;
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

using EmissionStats = std::variant<CategoricalEmissionStats, GaussianEmissionStats>;

struct SufficientStats {
  std::vector<double> initial_post;  // sum_k gamma^(k)[0]
  Matrix trans_counts;               // sum_k sum_t xi_t^(k)
  EmissionStats emit_stats;
  std::size_t n_sequences = 0;
  double total_log_likelihood = 0.0;
};

struct FitConfig {
  std::size_t max_iterations = 100;
  double rel_tolerance = 1e-6;
  double transition_floor = 0.0;
  double emission_floor = 0.0;
  double variance_floor = kDefaultVarianceFloor;
  /// Worker threads for the per-sequence E-step; 1 runs inline.
  std::size_t threads = 1;
};

/// Throws ValidationError if a field is out of range.
void validate(const FitConfig& config);

struct FitResult {
  HmmParameters params;
  std::vector<double> log_likelihood_trace;  // likelihood at the start of each iteration
  std::size_t iterations = 0;
  bool converged = false;
};

/// Raised by fit when an iteration fails; carries the trace up to that point.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> partial_trace)
      : Error(what), partial_trace_(std::move(partial_trace)) {}
  const std::vector<double>& partial_trace() const { return partial_trace_; }

 private:
  std::vector<double> partial_trace_;
};

/// E-step: posterior statistics under `params_prev`, summed over the
/// sequences in ascending index order. The result does not depend on
/// `threads`.
SufficientStats accumulate(const HmmParameters& params_prev,
                           const std::vector<ObservationSequence>& sequences,
                           std::size_t threads = 1);

InitialDistribution update_initial(const SufficientStats& stats);

/// Rows with no expected mass keep the previous row.
TransitionMatrix update_transitions(const SufficientStats& stats, const HmmParameters& params_prev,
                                    double floor = 0.0);

/// States with no expected occupancy keep their previous emission parameters.
EmissionModel update_emissions(const SufficientStats& stats, const HmmParameters& params_prev,
                               const FitConfig& config);

struct StepResult {
  HmmParameters params;
  double log_likelihood_prev = 0.0;
};

StepResult baum_welch_step(const HmmParameters& params_prev,
                           const std::vector<ObservationSequence>& sequences,
                           const FitConfig& config);

/// Iterates baum_welch_step until the relative change
/// |l_n - l_{n-1}| / (1 + |l_{n-1}|) drops below rel_tolerance or
/// max_iterations steps have run. The returned parameters are the output of
/// the last step.
FitResult fit(const HmmParameters& params_init, const std::vector<ObservationSequence>& sequences,
              const FitConfig& config);

}  // namespace hmmbw

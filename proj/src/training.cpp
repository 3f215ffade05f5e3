#include "hmmbw/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

namespace hmmbw {
namespace {

SufficientStats empty_stats(const HmmParameters& params) {
  const std::size_t n = params.n_states();
  SufficientStats stats;
  stats.initial_post.assign(n, 0.0);
  stats.trans_counts = Matrix(n, n);
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    stats.emit_stats = CategoricalEmissionStats{Matrix(n, cat->n_symbols())};
  } else {
    stats.emit_stats = GaussianEmissionStats{std::vector<double>(n, 0.0),
                                             std::vector<double>(n, 0.0),
                                             std::vector<double>(n, 0.0)};
  }
  return stats;
}

// Statistics of a single sequence.
SufficientStats sequence_stats(const HmmParameters& params, const ObservationSequence& obs) {
  const std::size_t n = params.n_states();
  const auto post = posteriors(params, obs);
  SufficientStats stats = empty_stats(params);
  stats.n_sequences = 1;
  stats.total_log_likelihood = post.log_likelihood;

  const auto g0 = post.gamma.row(0);
  std::copy(g0.begin(), g0.end(), stats.initial_post.begin());

  for (const Matrix& xi : post.xi) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) stats.trans_counts(i, j) += xi(i, j);
    }
  }

  if (auto* cat = std::get_if<CategoricalEmissionStats>(&stats.emit_stats)) {
    const auto& symbols = obs.symbols();
    for (std::size_t t = 0; t < obs.size(); ++t) {
      const auto m = static_cast<std::size_t>(symbols[t]);
      for (std::size_t i = 0; i < n; ++i) cat->counts(i, m) += post.gamma(t, i);
    }
  } else {
    auto& g = std::get<GaussianEmissionStats>(stats.emit_stats);
    const auto& values = obs.values();
    for (std::size_t t = 0; t < obs.size(); ++t) {
      const double o = values[t];
      for (std::size_t i = 0; i < n; ++i) {
        const double w = post.gamma(t, i);
        g.weight[i] += w;
        g.sum[i] += w * o;
        g.sum_sq[i] += w * o * o;
      }
    }
  }
  return stats;
}

void add_into(SufficientStats& total, const SufficientStats& part) {
  const std::size_t n = total.initial_post.size();
  for (std::size_t i = 0; i < n; ++i) total.initial_post[i] += part.initial_post[i];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) total.trans_counts(i, j) += part.trans_counts(i, j);
  }
  if (auto* cat = std::get_if<CategoricalEmissionStats>(&total.emit_stats)) {
    const auto& other = std::get<CategoricalEmissionStats>(part.emit_stats);
    for (std::size_t i = 0; i < cat->counts.rows(); ++i) {
      for (std::size_t m = 0; m < cat->counts.cols(); ++m) cat->counts(i, m) += other.counts(i, m);
    }
  } else {
    auto& g = std::get<GaussianEmissionStats>(total.emit_stats);
    const auto& other = std::get<GaussianEmissionStats>(part.emit_stats);
    for (std::size_t i = 0; i < n; ++i) {
      g.weight[i] += other.weight[i];
      g.sum[i] += other.sum[i];
      g.sum_sq[i] += other.sum_sq[i];
    }
  }
  total.n_sequences += part.n_sequences;
  total.total_log_likelihood += part.total_log_likelihood;
}

// Divides by the row mass, optionally floors and renormalizes. Returns false
// when the row has no mass and was left untouched.
bool normalize_row(std::span<double> row, double floor) {
  double mass = 0.0;
  for (double v : row) mass += v;
  if (!(mass > 0.0)) return false;
  for (double& v : row) v /= mass;
  if (floor > 0.0) {
    double floored = 0.0;
    for (double& v : row) {
      v = std::max(v, floor);
      floored += v;
    }
    for (double& v : row) v /= floored;
  }
  return true;
}

}  // namespace

void validate(const FitConfig& config) {
  if (config.max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(config.rel_tolerance > 0.0)) throw ValidationError("rel_tolerance must be > 0");
  if (!(config.transition_floor >= 0.0) || config.transition_floor >= 1.0) {
    throw ValidationError("transition_floor must be in [0, 1)");
  }
  if (!(config.emission_floor >= 0.0) || config.emission_floor >= 1.0) {
    throw ValidationError("emission_floor must be in [0, 1)");
  }
  if (!(config.variance_floor > 0.0) || !std::isfinite(config.variance_floor)) {
    throw ValidationError("variance_floor must be a positive finite number");
  }
  if (config.threads < 1) throw ValidationError("threads must be >= 1");
}

SufficientStats accumulate(const HmmParameters& params_prev,
                           const std::vector<ObservationSequence>& sequences,
                           std::size_t threads) {
  if (sequences.empty()) throw ValidationError("accumulate: no observation sequences");
  const std::size_t k_total = sequences.size();

  std::vector<std::optional<SufficientStats>> parts(k_total);
  std::vector<std::exception_ptr> errors(k_total);
  auto work = [&](std::size_t k) {
    try {
      parts[k] = sequence_stats(params_prev, sequences[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const std::size_t n_workers = std::min(std::max<std::size_t>(threads, 1), k_total);
  if (n_workers == 1) {
    for (std::size_t k = 0; k < k_total; ++k) work(k);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < k_total; k += n_workers) work(k);
      });
    }
  }

  for (std::size_t k = 0; k < k_total; ++k) {
    if (!errors[k]) continue;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const std::exception& e) {
      throw InferenceError("sequence " + std::to_string(k) + ": " + e.what());
    }
  }

  SufficientStats total = empty_stats(params_prev);
  for (std::size_t k = 0; k < k_total; ++k) add_into(total, *parts[k]);
  return total;
}

InitialDistribution update_initial(const SufficientStats& stats) {
  InitialDistribution pi{stats.initial_post};
  if (!normalize_row(pi.probs, 0.0)) {
    throw ValidationError("update_initial: initial-state posterior has zero mass");
  }
  return pi;
}

TransitionMatrix update_transitions(const SufficientStats& stats, const HmmParameters& params_prev,
                                    double floor) {
  TransitionMatrix out{stats.trans_counts};
  for (std::size_t i = 0; i < out.probs.rows(); ++i) {
    auto row = out.probs.row(i);
    if (!normalize_row(row, floor)) {
      const auto prev = params_prev.trans.probs.row(i);
      std::copy(prev.begin(), prev.end(), row.begin());
    }
  }
  return out;
}

EmissionModel update_emissions(const SufficientStats& stats, const HmmParameters& params_prev,
                               const FitConfig& config) {
  if (const auto* cat_stats = std::get_if<CategoricalEmissionStats>(&stats.emit_stats)) {
    const auto* prev = std::get_if<CategoricalEmission>(&params_prev.emission);
    if (!prev) throw ValidationError("update_emissions: categorical statistics for a gaussian model");
    CategoricalEmission out{cat_stats->counts};
    for (std::size_t i = 0; i < out.probs.rows(); ++i) {
      auto row = out.probs.row(i);
      if (!normalize_row(row, config.emission_floor)) {
        const auto prev_row = prev->probs.row(i);
        std::copy(prev_row.begin(), prev_row.end(), row.begin());
      }
    }
    return out;
  }

  const auto& g = std::get<GaussianEmissionStats>(stats.emit_stats);
  const auto* prev = std::get_if<GaussianEmission>(&params_prev.emission);
  if (!prev) throw ValidationError("update_emissions: gaussian statistics for a categorical model");
  GaussianEmission out = *prev;
  for (std::size_t i = 0; i < g.weight.size(); ++i) {
    if (!(g.weight[i] > 0.0)) continue;
    const double mean = g.sum[i] / g.weight[i];
    const double var = g.sum_sq[i] / g.weight[i] - mean * mean;
    out.means[i] = mean;
    out.variances[i] = std::max(var, config.variance_floor);
  }
  return out;
}

StepResult baum_welch_step(const HmmParameters& params_prev,
                           const std::vector<ObservationSequence>& sequences,
                           const FitConfig& config) {
  const SufficientStats stats = accumulate(params_prev, sequences, config.threads);
  StepResult out;
  out.params.pi = update_initial(stats);
  out.params.trans = update_transitions(stats, params_prev, config.transition_floor);
  out.params.emission = update_emissions(stats, params_prev, config);
  out.log_likelihood_prev = stats.total_log_likelihood;
  validate(out.params, config.variance_floor);
  return out;
}

FitResult fit(const HmmParameters& params_init, const std::vector<ObservationSequence>& sequences,
              const FitConfig& config) {
  validate(config);
  validate(params_init, config.variance_floor);

  FitResult result{params_init, {}, 0, false};
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    StepResult step;
    try {
      step = baum_welch_step(result.params, sequences, config);
    } catch (const Error& e) {
      throw FitError("iteration " + std::to_string(it + 1) + ": " + e.what(),
                     result.log_likelihood_trace);
    }
    auto& trace = result.log_likelihood_trace;
    trace.push_back(step.log_likelihood_prev);
    result.params = std::move(step.params);
    if (trace.size() >= 2) {
      const double prev = trace[trace.size() - 2];
      const double change = std::abs(trace.back() - prev) / (1.0 + std::abs(prev));
      if (change < config.rel_tolerance) {
        result.converged = true;
        break;
      }
    }
  }
  result.iterations = result.log_likelihood_trace.size();
  return result;
}

}  // namespace hmmbw

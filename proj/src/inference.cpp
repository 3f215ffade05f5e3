#include "hmmbw/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hmmbw/error.hpp"

namespace hmmbw {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double gaussian_log_density(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

// Emission terms for every step, stored as e(t, i) = b_i(o_t) * exp(-shift[t]).
// Categorical emissions are stored unshifted. Gaussian rows are computed in
// log space and shifted by their maximum so the largest entry is exactly 1.
struct EmissionTable {
  Matrix e;
  std::vector<double> shift;
};

EmissionTable emission_table(const HmmParameters& params, const ObservationSequence& obs) {
  const std::size_t n = params.n_states();
  const std::size_t t_len = obs.size();
  EmissionTable table{Matrix(t_len, n), std::vector<double>(t_len, 0.0)};

  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    const auto& symbols = obs.symbols();
    for (std::size_t t = 0; t < t_len; ++t) {
      const auto m = static_cast<std::size_t>(symbols[t]);
      for (std::size_t i = 0; i < n; ++i) table.e(t, i) = cat->probs(i, m);
    }
    return table;
  }

  const auto& g = std::get<GaussianEmission>(params.emission);
  const auto& values = obs.values();
  for (std::size_t t = 0; t < t_len; ++t) {
    auto row = table.e.row(t);
    double max_log = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      row[i] = gaussian_log_density(values[t], g.means[i], g.variances[i]);
      max_log = std::max(max_log, row[i]);
    }
    for (double& v : row) v = std::exp(v - max_log);
    table.shift[t] = max_log;
  }
  return table;
}

double log_emission(const HmmParameters& params, const ObservationSequence& obs, std::size_t t,
                    std::size_t i) {
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    return std::log(cat->probs(i, static_cast<std::size_t>(obs.symbols()[t])));
  }
  const auto& g = std::get<GaussianEmission>(params.emission);
  return gaussian_log_density(obs.values()[t], g.means[i], g.variances[i]);
}

// b_j(o_t) * c_t for every state j, the emission term of the backward step.
void scaled_emission(const EmissionTable& table, std::size_t t, double scale,
                     std::span<double> out) {
  const double factor =
      table.shift[t] == 0.0 ? scale : std::exp(table.shift[t] + std::log(scale));
  const auto e = table.e.row(t);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = e[j] * factor;
}

ForwardResult forward_impl(const HmmParameters& params, const EmissionTable& table) {
  const std::size_t n = params.n_states();
  const std::size_t t_len = table.e.rows();
  const Matrix& a = params.trans.probs;

  ForwardResult out{Matrix(t_len, n), std::vector<double>(t_len), 0.0};
  std::vector<double> predicted(params.pi.probs);

  for (std::size_t t = 0; t < t_len; ++t) {
    if (t > 0) {
      std::fill(predicted.begin(), predicted.end(), 0.0);
      const auto prev = out.alpha_hat.row(t - 1);
      for (std::size_t i = 0; i < n; ++i) {
        if (prev[i] == 0.0) continue;
        const auto a_row = a.row(i);
        for (std::size_t j = 0; j < n; ++j) predicted[j] += prev[i] * a_row[j];
      }
    }
    auto row = out.alpha_hat.row(t);
    const auto e = table.e.row(t);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = predicted[j] * e[j];
      sum += row[j];
    }
    if (!(sum > 0.0)) {
      throw InferenceError("zero probability at step " + std::to_string(t) +
                           ": observation is impossible under the model");
    }
    for (double& v : row) v /= sum;

    const double scale =
        table.shift[t] == 0.0 ? 1.0 / sum : std::exp(-(std::log(sum) + table.shift[t]));
    if (!std::isfinite(scale) || !(scale > 0.0)) {
      throw InferenceError("scale factor out of range at step " + std::to_string(t));
    }
    out.scales[t] = scale;
  }

  double log_lik = 0.0;
  for (double c : out.scales) log_lik -= std::log(c);
  out.log_likelihood = log_lik;
  return out;
}

Matrix backward_impl(const HmmParameters& params, const EmissionTable& table,
                     const std::vector<double>& scales) {
  const std::size_t n = params.n_states();
  const std::size_t t_len = table.e.rows();
  const Matrix& a = params.trans.probs;

  Matrix beta_hat(t_len, n);
  // Backward variables divided by their own c_t; beta_hat(t, .) = c_t * this.
  std::vector<double> beta_norm(n, 1.0);
  std::vector<double> next(n);
  std::vector<double> emit(n);

  for (std::size_t i = 0; i < n; ++i) beta_hat(t_len - 1, i) = scales[t_len - 1];
  for (std::size_t t = t_len - 1; t-- > 0;) {
    scaled_emission(table, t + 1, scales[t + 1], emit);
    for (std::size_t j = 0; j < n; ++j) next[j] = emit[j] * beta_norm[j];
    for (std::size_t i = 0; i < n; ++i) {
      const auto a_row = a.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += a_row[j] * next[j];
      beta_norm[i] = acc;
      beta_hat(t, i) = scales[t] * acc;
    }
  }
  return beta_hat;
}

}  // namespace

ObservationSequence ObservationSequence::categorical(std::vector<int> symbols) {
  if (symbols.empty()) throw ValidationError("observation sequence is empty");
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    if (symbols[t] < 0) {
      throw ValidationError("negative symbol " + std::to_string(symbols[t]) + " at position " +
                            std::to_string(t));
    }
  }
  return ObservationSequence(std::move(symbols));
}

ObservationSequence ObservationSequence::gaussian(std::vector<double> values) {
  if (values.empty()) throw ValidationError("observation sequence is empty");
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t])) {
      throw ValidationError("non-finite observation at position " + std::to_string(t));
    }
  }
  return ObservationSequence(std::move(values));
}

EmissionKind ObservationSequence::kind() const {
  return std::holds_alternative<std::vector<int>>(data_) ? EmissionKind::categorical
                                                         : EmissionKind::gaussian;
}

std::size_t ObservationSequence::size() const {
  return std::visit([](const auto& v) { return v.size(); }, data_);
}

const std::vector<int>& ObservationSequence::symbols() const {
  if (const auto* s = std::get_if<std::vector<int>>(&data_)) return *s;
  throw ValidationError("sequence holds gaussian values, not categorical symbols");
}

const std::vector<double>& ObservationSequence::values() const {
  if (const auto* v = std::get_if<std::vector<double>>(&data_)) return *v;
  throw ValidationError("sequence holds categorical symbols, not gaussian values");
}

void check_compatible(const HmmParameters& params, const ObservationSequence& obs) {
  if (obs.kind() != params.emission_kind()) {
    throw InferenceError(std::string("sequence is ") + to_string(obs.kind()) +
                         " but the model emission is " + to_string(params.emission_kind()));
  }
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    const auto& symbols = obs.symbols();
    for (std::size_t t = 0; t < symbols.size(); ++t) {
      if (static_cast<std::size_t>(symbols[t]) >= cat->n_symbols()) {
        throw InferenceError("symbol " + std::to_string(symbols[t]) + " at position " +
                             std::to_string(t) + " is out of range [0, " +
                             std::to_string(cat->n_symbols()) + ")");
      }
    }
  }
}

ForwardResult forward(const HmmParameters& params, const ObservationSequence& obs) {
  check_compatible(params, obs);
  return forward_impl(params, emission_table(params, obs));
}

Matrix backward(const HmmParameters& params, const ObservationSequence& obs,
                const std::vector<double>& scales) {
  check_compatible(params, obs);
  if (scales.size() != obs.size()) {
    throw InferenceError("backward: " + std::to_string(scales.size()) +
                         " scale factors for a sequence of length " + std::to_string(obs.size()));
  }
  return backward_impl(params, emission_table(params, obs), scales);
}

ScaledTrellis forward_backward(const HmmParameters& params, const ObservationSequence& obs) {
  check_compatible(params, obs);
  const auto table = emission_table(params, obs);
  auto fwd = forward_impl(params, table);
  auto beta_hat = backward_impl(params, table, fwd.scales);
  return {std::move(fwd.alpha_hat), std::move(beta_hat), std::move(fwd.scales),
          fwd.log_likelihood};
}

PosteriorStats posteriors(const HmmParameters& params, const ObservationSequence& obs) {
  check_compatible(params, obs);
  const std::size_t n = params.n_states();
  const std::size_t t_len = obs.size();
  const Matrix& a = params.trans.probs;

  const auto table = emission_table(params, obs);
  const auto fwd = forward_impl(params, table);
  const auto beta_hat = backward_impl(params, table, fwd.scales);

  PosteriorStats out{Matrix(t_len, n), std::vector<Matrix>(t_len - 1, Matrix(n, n)),
                     fwd.log_likelihood};

  for (std::size_t t = 0; t < t_len; ++t) {
    auto g = out.gamma.row(t);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = fwd.alpha_hat(t, i) * (beta_hat(t, i) / fwd.scales[t]);
      sum += g[i];
    }
    for (double& v : g) v /= sum;
  }

  std::vector<double> next(n);
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    scaled_emission(table, t + 1, fwd.scales[t + 1], next);
    for (std::size_t j = 0; j < n; ++j) next[j] *= beta_hat(t + 1, j) / fwd.scales[t + 1];
    Matrix& xi = out.xi[t];
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double alpha = fwd.alpha_hat(t, i);
      for (std::size_t j = 0; j < n; ++j) {
        xi(i, j) = alpha * a(i, j) * next[j];
        sum += xi(i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : xi.row(i)) v /= sum;
    }
  }
  return out;
}

double log_likelihood(const HmmParameters& params, const ObservationSequence& obs) {
  return forward(params, obs).log_likelihood;
}

ViterbiResult viterbi(const HmmParameters& params, const ObservationSequence& obs) {
  check_compatible(params, obs);
  const std::size_t n = params.n_states();
  const std::size_t t_len = obs.size();

  Matrix log_a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_a(i, j) = std::log(params.trans.probs(i, j));
  }

  std::vector<double> delta(n);
  std::vector<double> next(n);
  std::vector<std::vector<std::size_t>> back(t_len, std::vector<std::size_t>(n, 0));

  for (std::size_t i = 0; i < n; ++i) {
    delta[i] = std::log(params.pi.probs[i]) + log_emission(params, obs, 0, i);
  }
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double cand = delta[i] + log_a(i, j);
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      back[t][j] = arg;
      next[j] = best + log_emission(params, obs, t, j);
    }
    delta.swap(next);
  }

  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (delta[i] > best) {
      best = delta[i];
      arg = i;
    }
  }
  if (best == kNegInf) throw InferenceError("impossible observation: every path has zero probability");

  ViterbiResult out{std::vector<std::size_t>(t_len), best};
  out.path[t_len - 1] = arg;
  for (std::size_t t = t_len - 1; t > 0; --t) out.path[t - 1] = back[t][out.path[t]];
  return out;
}

SampleResult sample(const HmmParameters& params, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  return sample(params, length, rng);
}

SampleResult sample(const HmmParameters& params, std::size_t length, Rng& rng) {
  if (length == 0) throw ValidationError("sample length must be >= 1");
  std::vector<std::size_t> states(length);
  const auto* cat = std::get_if<CategoricalEmission>(&params.emission);
  const auto* gauss = std::get_if<GaussianEmission>(&params.emission);
  std::vector<int> symbols;
  std::vector<double> values;

  for (std::size_t t = 0; t < length; ++t) {
    states[t] = t == 0 ? rng.categorical(params.pi.probs)
                       : rng.categorical(params.trans.probs.row(states[t - 1]));
    const std::size_t s = states[t];
    if (cat) {
      symbols.push_back(static_cast<int>(rng.categorical(cat->probs.row(s))));
    } else {
      values.push_back(gauss->means[s] + std::sqrt(gauss->variances[s]) * rng.normal());
    }
  }
  return {std::move(states), cat ? ObservationSequence::categorical(std::move(symbols))
                                 : ObservationSequence::gaussian(std::move(values))};
}

}  // namespace hmmbw

#pragma once

// Fixtures and random instance generators shared by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "hmmbw/inference.hpp"
#include "hmmbw/model.hpp"

namespace hmmbw::testing {

inline HmmParameters categorical_model(std::vector<double> pi,
                                       const std::vector<std::vector<double>>& trans,
                                       const std::vector<std::vector<double>>& emit) {
  return HmmParameters{{std::move(pi)},
                       {Matrix::from_rows(trans)},
                       CategoricalEmission{Matrix::from_rows(emit)}};
}

inline HmmParameters gaussian_model(std::vector<double> pi,
                                    const std::vector<std::vector<double>>& trans,
                                    std::vector<double> means, std::vector<double> variances) {
  return HmmParameters{{std::move(pi)},
                       {Matrix::from_rows(trans)},
                       GaussianEmission{std::move(means), std::move(variances)}};
}

/// pi = [0.6, 0.4], a = [[0.7, 0.3], [0.4, 0.6]], b = [[0.9, 0.1], [0.2, 0.8]].
inline HmmParameters two_state_model() {
  return categorical_model({0.6, 0.4}, {{0.7, 0.3}, {0.4, 0.6}}, {{0.9, 0.1}, {0.2, 0.8}});
}

inline HmmParameters single_state_model(std::vector<double> emit_row = {0.25, 0.75}) {
  return categorical_model({1.0}, {{1.0}}, {std::move(emit_row)});
}

/// Starts in state 0, alternates states, state i always emits symbol i.
inline HmmParameters deterministic_chain() {
  return categorical_model({1.0, 0.0}, {{0.0, 1.0}, {1.0, 0.0}}, {{1.0, 0.0}, {0.0, 1.0}});
}

inline ObservationSequence cat(std::vector<int> symbols) {
  return ObservationSequence::categorical(std::move(symbols));
}

inline ObservationSequence gauss(std::vector<double> values) {
  return ObservationSequence::gaussian(std::move(values));
}

/// Test-side generator, independent of the library's Rng.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : engine_(seed) {}

  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  /// Random distribution; with probability `sparsity` each entry is zeroed
  /// (at least one entry stays positive). Peakedness varies per call.
  std::vector<double> distribution(std::size_t n, double sparsity = 0.0) {
    std::vector<double> p(n);
    const double power = uniform(0.5, 3.0);
    double total = 0.0;
    for (double& v : p) {
      v = std::pow(uniform(1e-3, 1.0), power);
      if (uniform(0.0, 1.0) < sparsity) v = 0.0;
      total += v;
    }
    if (total == 0.0) {
      p[uniform_int(0, n - 1)] = 1.0;
      total = 1.0;
    }
    for (double& v : p) v /= total;
    return p;
  }

  HmmParameters categorical(std::size_t n, std::size_t m, double sparsity = 0.0) {
    HmmParameters params;
    params.pi.probs = distribution(n, sparsity);
    params.trans.probs = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = distribution(n, sparsity);
      std::copy(row.begin(), row.end(), params.trans.probs.row(i).begin());
    }
    CategoricalEmission emit{Matrix(n, m)};
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = distribution(m, sparsity);
      std::copy(row.begin(), row.end(), emit.probs.row(i).begin());
    }
    params.emission = std::move(emit);
    return params;
  }

  HmmParameters gaussian(std::size_t n) {
    HmmParameters params;
    params.pi.probs = distribution(n);
    params.trans.probs = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = distribution(n);
      std::copy(row.begin(), row.end(), params.trans.probs.row(i).begin());
    }
    GaussianEmission g;
    for (std::size_t i = 0; i < n; ++i) {
      g.means.push_back(uniform(-3.0, 3.0));
      g.variances.push_back(uniform(0.2, 3.0));
    }
    params.emission = std::move(g);
    return params;
  }

  /// Symbols drawn uniformly, so sequences may be unlikely under the model.
  ObservationSequence symbols(std::size_t length, std::size_t m) {
    std::vector<int> s(length);
    for (int& v : s) v = static_cast<int>(uniform_int(0, m - 1));
    return ObservationSequence::categorical(std::move(s));
  }

  ObservationSequence values(std::size_t length) {
    std::vector<double> v(length);
    for (double& x : v) x = uniform(-4.0, 4.0);
    return ObservationSequence::gaussian(std::move(v));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) d = std::max(d, std::abs(a(r, c) - b(r, c)));
  }
  return d;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double max_abs_diff(const EmissionModel& a, const EmissionModel& b) {
  if (const auto* ca = std::get_if<CategoricalEmission>(&a)) {
    return max_abs_diff(ca->probs, std::get<CategoricalEmission>(b).probs);
  }
  const auto& ga = std::get<GaussianEmission>(a);
  const auto& gb = std::get<GaussianEmission>(b);
  return std::max(max_abs_diff(ga.means, gb.means), max_abs_diff(ga.variances, gb.variances));
}

inline double max_abs_diff(const HmmParameters& a, const HmmParameters& b) {
  return std::max({max_abs_diff(a.pi.probs, b.pi.probs), max_abs_diff(a.trans.probs, b.trans.probs),
                   max_abs_diff(a.emission, b.emission)});
}

/// log p(O | lambda) by a log-space forward recursion (log-sum-exp), as an
/// underflow-free reference for long sequences.
inline double log_space_likelihood(const HmmParameters& params, const ObservationSequence& obs) {
  const std::size_t n = params.n_states();
  auto log_b = [&](std::size_t t, std::size_t i) {
    if (const auto* c = std::get_if<CategoricalEmission>(&params.emission)) {
      return std::log(c->probs(i, static_cast<std::size_t>(obs.symbols()[t])));
    }
    const auto& g = std::get<GaussianEmission>(params.emission);
    const double d = obs.values()[t] - g.means[i];
    return -0.5 * std::log(2.0 * M_PI * g.variances[i]) - 0.5 * d * d / g.variances[i];
  };
  auto lse = [](const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (m == -INFINITY) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
  };
  std::vector<double> la(n);
  for (std::size_t i = 0; i < n; ++i) la[i] = std::log(params.pi.probs[i]) + log_b(0, i);
  std::vector<double> terms(n);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) terms[i] = la[i] + std::log(params.trans.probs(i, j));
      next[j] = lse(terms) + log_b(t, j);
    }
    la = next;
  }
  return lse(la);
}

}  // namespace hmmbw::testing

#include "hmmbw/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hmmbw/error.hpp"

namespace hmmbw::oracle {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double emission_density(const HmmParameters& params, const ObservationSequence& obs,
                        std::size_t t, std::size_t state) {
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    return cat->probs(state, static_cast<std::size_t>(obs.symbols()[t]));
  }
  const auto& g = std::get<GaussianEmission>(params.emission);
  const double d = obs.values()[t] - g.means[state];
  const double v = g.variances[state];
  return std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

double log_emission_density(const HmmParameters& params, const ObservationSequence& obs,
                            std::size_t t, std::size_t state) {
  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    return std::log(cat->probs(state, static_cast<std::size_t>(obs.symbols()[t])));
  }
  const auto& g = std::get<GaussianEmission>(params.emission);
  const double d = obs.values()[t] - g.means[state];
  const double v = g.variances[state];
  return -0.5 * d * d / v - 0.5 * std::log(2.0 * std::numbers::pi * v);
}

double path_log_joint(const HmmParameters& params, const ObservationSequence& obs,
                      const std::vector<std::size_t>& path) {
  double lp = std::log(params.pi.probs[path[0]]) + log_emission_density(params, obs, 0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    lp += std::log(params.trans.probs(path[t - 1], path[t])) +
          log_emission_density(params, obs, t, path[t]);
  }
  return lp;
}

void check_guard(const HmmParameters& params, const ObservationSequence& obs) {
  check_compatible(params, obs);
  std::size_t paths = 1;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    paths *= params.n_states();
    if (paths > kMaxPaths) {
      throw OracleError("instance too large: " + std::to_string(params.n_states()) + "^" +
                        std::to_string(obs.size()) + " paths exceeds " +
                        std::to_string(kMaxPaths));
    }
  }
}

// Calls visit(path) for every state path in lexicographic order.
template <typename Visit>
void for_each_path(std::size_t n_states, std::size_t length, Visit&& visit) {
  std::vector<std::size_t> path(length, 0);
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(path));
    std::size_t pos = length;
    while (pos > 0) {
      --pos;
      if (++path[pos] < n_states) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
  }
}

}  // namespace

double path_joint(const HmmParameters& params, const ObservationSequence& obs,
                  const std::vector<std::size_t>& path) {
  double p = params.pi.probs[path[0]] * emission_density(params, obs, 0, path[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    p *= params.trans.probs(path[t - 1], path[t]) * emission_density(params, obs, t, path[t]);
  }
  return p;
}

double enumerate_likelihood(const HmmParameters& params, const ObservationSequence& obs) {
  check_guard(params, obs);
  CompensatedSum total;
  for_each_path(params.n_states(), obs.size(),
                [&](const auto& path) { total.add(path_joint(params, obs, path)); });
  return total.value();
}

ExactPosteriors enumerate_posteriors(const HmmParameters& params, const ObservationSequence& obs) {
  check_guard(params, obs);
  const std::size_t n = params.n_states();
  const std::size_t t_len = obs.size();

  CompensatedSum total;
  std::vector<CompensatedSum> gamma_acc(t_len * n);
  std::vector<CompensatedSum> xi_acc((t_len - 1) * n * n);

  for_each_path(n, t_len, [&](const auto& path) {
    const double p = path_joint(params, obs, path);
    total.add(p);
    for (std::size_t t = 0; t < t_len; ++t) gamma_acc[t * n + path[t]].add(p);
    for (std::size_t t = 0; t + 1 < t_len; ++t) {
      xi_acc[(t * n + path[t]) * n + path[t + 1]].add(p);
    }
  });

  ExactPosteriors out;
  out.likelihood = total.value();
  if (!(out.likelihood > 0.0)) {
    throw OracleError("zero likelihood: observation is impossible under the model");
  }
  out.gamma = Matrix(t_len, n);
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      out.gamma(t, i) = gamma_acc[t * n + i].value() / out.likelihood;
    }
  }
  out.xi.assign(t_len - 1, Matrix(n, n));
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out.xi[t](i, j) = xi_acc[(t * n + i) * n + j].value() / out.likelihood;
      }
    }
  }
  return out;
}

double enumerate_q(const HmmParameters& params_new, const HmmParameters& params_prev,
                   const std::vector<ObservationSequence>& sequences) {
  CompensatedSum q;
  bool impossible = false;
  for (std::size_t k = 0; k < sequences.size(); ++k) {
    const auto& obs = sequences[k];
    check_guard(params_new, obs);
    const double lik = enumerate_likelihood(params_prev, obs);
    if (!(lik > 0.0)) {
      throw OracleError("sequence " + std::to_string(k) + " has zero likelihood under params_prev");
    }
    for_each_path(params_prev.n_states(), obs.size(), [&](const auto& path) {
      const double w = path_joint(params_prev, obs, path) / lik;
      if (w == 0.0 || impossible) return;
      const double lj = path_log_joint(params_new, obs, path);
      if (lj == -std::numeric_limits<double>::infinity()) {
        impossible = true;
        return;
      }
      q.add(w * lj);
    });
    if (impossible) return -std::numeric_limits<double>::infinity();
  }
  return q.value();
}

double path_posterior_entropy(const HmmParameters& params,
                              const std::vector<ObservationSequence>& sequences) {
  CompensatedSum h;
  for (const auto& obs : sequences) {
    const double lik = enumerate_likelihood(params, obs);
    if (!(lik > 0.0)) throw OracleError("zero likelihood: observation is impossible under the model");
    for_each_path(params.n_states(), obs.size(), [&](const auto& path) {
      const double w = path_joint(params, obs, path) / lik;
      if (w > 0.0) h.add(-w * std::log(w));
    });
  }
  return h.value();
}

std::vector<std::size_t> enumerate_best_path(const HmmParameters& params,
                                             const ObservationSequence& obs) {
  check_guard(params, obs);
  double best = 0.0;
  std::vector<std::size_t> best_path;
  for_each_path(params.n_states(), obs.size(), [&](const auto& path) {
    const double p = path_joint(params, obs, path);
    if (p > best) {
      best = p;
      best_path = path;
    }
  });
  if (best_path.empty()) throw OracleError("impossible observation: every path has zero probability");
  return best_path;
}

}  // namespace hmmbw::oracle

#include "hmmbw/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "hmmbw/error.hpp"
#include "hmmbw/rng.hpp"

namespace hmmbw {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_probability_vector(std::span<const double> probs, const std::string& what) {
  double sum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const double p = probs[j];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError(what + ": entry " + std::to_string(j) + " = " + fmt(p) +
                            " is outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError(what + " sum is " + fmt(sum) + ", expected 1");
  }
}

void check_stochastic_rows(const Matrix& m, const std::string& what) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    check_probability_vector(m.row(i), what + " row " + std::to_string(i));
  }
}

std::vector<double> flat_dirichlet(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  double total = 0.0;
  for (double& v : out) {
    v = rng.exponential();
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

const char* to_string(EmissionKind kind) {
  return kind == EmissionKind::categorical ? "categorical" : "gaussian";
}

EmissionKind kind_of(const EmissionModel& emission) {
  return std::holds_alternative<CategoricalEmission>(emission) ? EmissionKind::categorical
                                                               : EmissionKind::gaussian;
}

const HmmParameters& validate(const HmmParameters& params, double variance_floor) {
  const std::size_t n = params.n_states();
  if (n == 0) throw ValidationError("model has no states");

  check_probability_vector(params.pi.probs, "initial distribution");

  const Matrix& a = params.trans.probs;
  if (a.rows() != n || a.cols() != n) {
    throw ValidationError("transition matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", expected " + std::to_string(n) + "x" +
                          std::to_string(n));
  }
  check_stochastic_rows(a, "transition");

  if (const auto* cat = std::get_if<CategoricalEmission>(&params.emission)) {
    if (cat->probs.rows() != n) {
      throw ValidationError("emission matrix has " + std::to_string(cat->probs.rows()) +
                            " rows, expected " + std::to_string(n));
    }
    if (cat->n_symbols() == 0) throw ValidationError("emission matrix has no symbols");
    check_stochastic_rows(cat->probs, "emission");
  } else {
    const auto& g = std::get<GaussianEmission>(params.emission);
    if (g.means.size() != n || g.variances.size() != n) {
      throw ValidationError("gaussian emission has " + std::to_string(g.means.size()) +
                            " means and " + std::to_string(g.variances.size()) +
                            " variances, expected " + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(g.means[i])) {
        throw ValidationError("gaussian mean " + std::to_string(i) + " is not finite");
      }
      if (!std::isfinite(g.variances[i]) || g.variances[i] < variance_floor) {
        throw ValidationError("gaussian variance " + std::to_string(i) + " = " +
                              fmt(g.variances[i]) + " is below the floor " + fmt(variance_floor));
      }
    }
  }
  return params;
}

HmmParameters random_init(std::size_t n_states, const EmissionSpec& spec, std::uint64_t seed) {
  if (n_states == 0) throw ValidationError("random_init: n_states must be >= 1");
  if (spec.kind == EmissionKind::categorical && spec.n_symbols == 0) {
    throw ValidationError("random_init: n_symbols must be >= 1");
  }

  Rng rng(seed);
  HmmParameters params;
  params.pi.probs = flat_dirichlet(rng, n_states);

  params.trans.probs = Matrix(n_states, n_states);
  for (std::size_t i = 0; i < n_states; ++i) {
    const auto row = flat_dirichlet(rng, n_states);
    std::copy(row.begin(), row.end(), params.trans.probs.row(i).begin());
  }

  if (spec.kind == EmissionKind::categorical) {
    CategoricalEmission cat{Matrix(n_states, spec.n_symbols)};
    for (std::size_t i = 0; i < n_states; ++i) {
      const auto row = flat_dirichlet(rng, spec.n_symbols);
      std::copy(row.begin(), row.end(), cat.probs.row(i).begin());
    }
    params.emission = std::move(cat);
  } else {
    GaussianEmission g;
    g.means.resize(n_states);
    for (double& m : g.means) m = rng.normal();
    g.variances.assign(n_states, 1.0);
    params.emission = std::move(g);
  }
  return params;
}

}  // namespace hmmbw

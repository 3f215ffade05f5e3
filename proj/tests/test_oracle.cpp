#include <cmath>
#include <limits>

#include "doctest.h"
#include "hmmbw/error.hpp"
#include "hmmbw/oracle.hpp"
#include "support.hpp"

using namespace hmmbw;
using namespace hmmbw::testing;

TEST_CASE("enumerate_likelihood examples") {
  CHECK(oracle::enumerate_likelihood(single_state_model(), cat({1, 0, 1})) ==
        doctest::Approx(0.75 * 0.25 * 0.75).epsilon(1e-15));

  const double expanded = 0.54 * 0.7 * 0.1 + 0.54 * 0.3 * 0.8 + 0.08 * 0.4 * 0.1 + 0.08 * 0.6 * 0.8;
  CHECK(expanded == doctest::Approx(0.209).epsilon(1e-15));
  CHECK(oracle::enumerate_likelihood(two_state_model(), cat({0, 1})) ==
        doctest::Approx(0.209).epsilon(1e-15));

  const auto never = categorical_model({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}}, {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  CHECK(oracle::enumerate_likelihood(never, cat({0, 2})) == 0.0);
  CHECK_THROWS_AS(oracle::enumerate_posteriors(never, cat({0, 2})), OracleError);
}

TEST_CASE("enumerate_posteriors examples") {
  const auto det = oracle::enumerate_posteriors(deterministic_chain(), cat({0, 1, 0}));
  CHECK(det.likelihood == 1.0);
  for (std::size_t t = 0; t < 3; ++t) CHECK(det.gamma(t, t % 2) == 1.0);
  CHECK(det.xi[0](0, 1) == 1.0);
  CHECK(det.xi[1](1, 0) == 1.0);

  const auto two = oracle::enumerate_posteriors(two_state_model(), cat({0, 1}));
  CHECK(two.gamma(0, 0) == doctest::Approx(0.8010).epsilon(5e-5));
  CHECK(two.gamma(0, 1) == doctest::Approx(0.1990).epsilon(5e-4));
  CHECK(two.gamma(0, 0) == doctest::Approx(0.54 * 0.31 / 0.209).epsilon(1e-14));

  const auto params = two_state_model();
  const auto t1 = oracle::enumerate_posteriors(params, cat({1}));
  const double z = 0.6 * 0.1 + 0.4 * 0.8;
  CHECK(t1.gamma(0, 0) == doctest::Approx(0.06 / z).epsilon(1e-15));
  CHECK(t1.gamma(0, 1) == doctest::Approx(0.32 / z).epsilon(1e-15));
  CHECK(t1.xi.empty());
}

TEST_CASE("exact posteriors satisfy marginalization identities") {
  InstanceGenerator gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = gen.uniform_int(1, 3);
    const auto params = trial % 2 ? gen.gaussian(n) : gen.categorical(n, 3);
    const auto obs = trial % 2 ? gen.values(gen.uniform_int(1, 6)) : gen.symbols(gen.uniform_int(1, 6), 3);
    const auto ex = oracle::enumerate_posteriors(params, obs);
    for (std::size_t t = 0; t < obs.size(); ++t) {
      double s = 0.0;
      for (double g : ex.gamma.row(t)) s += g;
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    for (std::size_t t = 0; t + 1 < obs.size(); ++t) {
      for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (double x : ex.xi[t].row(i)) r += x;
        CHECK(std::abs(r - ex.gamma(t, i)) < 1e-12);
      }
    }
  }
}

TEST_CASE("enumeration guard") {
  const auto params = two_state_model();
  CHECK_NOTHROW(oracle::enumerate_likelihood(params, cat(std::vector<int>(19, 0))));  // 2^19 paths
  CHECK_THROWS_WITH_AS(oracle::enumerate_likelihood(params, cat(std::vector<int>(20, 0))),
                       doctest::Contains("instance too large"), OracleError);
  CHECK_THROWS_AS(oracle::enumerate_q(params, params, {cat(std::vector<int>(21, 0))}), OracleError);
}

TEST_CASE("enumerate_q examples") {
  const auto det = deterministic_chain();
  const auto obs = cat({0, 1, 0, 1});
  CHECK(oracle::enumerate_q(det, det, {obs}) == 0.0);

  // Softened version of the chain: a single path keeps all posterior mass
  // under `det`, so Q is that path's log joint under the softened model.
  const auto soft = categorical_model({0.9, 0.1}, {{0.2, 0.8}, {0.7, 0.3}}, {{0.6, 0.4}, {0.25, 0.75}});
  const double expected = std::log(0.9 * 0.6 * 0.8 * 0.75 * 0.7 * 0.6 * 0.8 * 0.75);
  CHECK(oracle::enumerate_q(soft, det, {obs}) == doctest::Approx(expected).epsilon(1e-14));

  // A path with positive posterior that the new model forbids.
  const auto forbids = categorical_model({0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}}, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK(oracle::enumerate_q(forbids, det, {obs}) == -std::numeric_limits<double>::infinity());

  // Q(l', l') = sum_paths w log(joint) = log L - H(path posterior).
  const auto params = two_state_model();
  const auto seq = cat({0, 1});
  const double joints[4] = {0.54 * 0.7 * 0.1, 0.54 * 0.3 * 0.8, 0.08 * 0.4 * 0.1, 0.08 * 0.6 * 0.8};
  double q = 0.0;
  double h = 0.0;
  for (double j : joints) {
    q += j / 0.209 * std::log(j);
    h -= j / 0.209 * std::log(j / 0.209);
  }
  CHECK(oracle::enumerate_q(params, params, {seq}) == doctest::Approx(q).epsilon(1e-14));
  CHECK(oracle::path_posterior_entropy(params, {seq}) == doctest::Approx(h).epsilon(1e-14));
  CHECK(q + h == doctest::Approx(std::log(0.209)).epsilon(1e-14));
}

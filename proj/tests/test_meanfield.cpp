#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hkdelay/errors.hpp"
#include "hkdelay/meanfield.hpp"
#include "hkdelay/rng.hpp"
#include "permutation_oracle.hpp"

using namespace hkdelay;

namespace {

EmpiricalMeasure random_measure(Rng& rng, std::size_t n, std::size_t d, double width) {
  Positions p(n, d);
  for (auto& v : p.flat()) v = rng.uniform(-width, width);
  return {std::move(p), 0.0};
}

std::vector<double> sorted_coord(const EmpiricalMeasure& m, std::size_t c) {
  std::vector<double> v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = m.atoms(i, c);
  std::sort(v.begin(), v.end());
  return v;
}

ModelParams mf_params(double tau, double beta) {
  ModelParams p;
  p.tau = tau;
  p.influence = InfluenceFunction::power_law(beta);
  return p;
}

}  // namespace

TEST_CASE("w1_1d examples") {
  const std::vector<double> a{0, 1}, b{0.5, 0.5}, c{0}, d{3};
  CHECK(w1_1d(a, a) == 0.0);
  CHECK(w1_1d(a, b) == 0.5);
  CHECK(w1_1d(c, d) == 3.0);
  CHECK(test::permutation_w1(Positions(2, 1, {0, 1}), Positions(2, 1, {0.5, 0.5})) == 0.5);
  CHECK_THROWS_AS(w1_1d(a, c), DomainError);
  const std::vector<double> unsorted{1, 0};
  CHECK_THROWS_AS(w1_1d(unsorted, a), DomainError);
}

TEST_CASE("w1_projected examples") {
  Rng rng(1);
  auto mu = random_measure(rng, 6, 2, 3);
  CHECK(w1_projected(mu, mu) == 0.0);
  auto nu = mu;
  for (std::size_t i = 0; i < nu.size(); ++i) nu.atoms(i, 0) += 1.0;
  CHECK(w1_projected(mu, nu) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(test::permutation_w1(mu.atoms, nu.atoms) == doctest::Approx(1.0).epsilon(1e-14));

  auto one = random_measure(rng, 5, 1, 3);
  auto two = random_measure(rng, 5, 1, 3);
  CHECK(w1_projected(one, two) == w1_1d(sorted_coord(one, 0), sorted_coord(two, 0)));
  CHECK_THROWS_AS(w1_projected(one, random_measure(rng, 4, 1, 3)), DomainError);
}

TEST_CASE("property: W1 against the permutation oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next() % 8;
    const std::size_t d = 1 + rng.next() % 3;
    auto mu = random_measure(rng, n, d, 5);
    auto nu = random_measure(rng, n, d, 5);
    const double exact = test::permutation_w1(mu.atoms, nu.atoms);
    const double proj = w1_projected(mu, nu);
    CHECK(proj <= exact + 1e-12);
    if (d == 1) CHECK(std::abs(proj - exact) <= 1e-12);
    for (std::size_t c = 0; c < d; ++c) {
      Positions a(n, 1), b(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        a(i, 0) = mu.atoms(i, c);
        b(i, 0) = nu.atoms(i, c);
      }
      CHECK(std::abs(w1_1d(sorted_coord(mu, c), sorted_coord(nu, c)) -
                     test::permutation_w1(a, b)) <= 1e-12);
    }
  }
}

TEST_CASE("property: w1_1d is a metric on equal-size samples") {
  Rng rng(78);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.next() % 20;
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-10, 10);
      b[i] = rng.uniform(-10, 10);
      c[i] = rng.uniform(-10, 10);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::sort(c.begin(), c.end());
    CHECK(w1_1d(a, a) == 0.0);
    CHECK(w1_1d(a, b) == w1_1d(b, a));
    CHECK(w1_1d(a, c) <= w1_1d(a, b) + w1_1d(b, c) + 1e-12);
    if (a != b) CHECK(w1_1d(a, b) > 0.0);
  }
}

TEST_CASE("source densities stay inside their box") {
  SourceDensity g;
  g.kind = SourceDensity::Kind::Gaussian;
  g.lo = {0, -1};
  g.hi = {10, 1};
  g.mean = {5, 0};
  g.scale = {4, 3};
  Rng rng(3);
  auto p = g.sample(500, rng);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK((p(i, 0) >= 0 && p(i, 0) <= 10));
    CHECK((p(i, 1) >= -1 && p(i, 1) <= 1));
  }
  g.hi = {10};
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("run_meanfield degenerate source stays a point") {
  MeanFieldExperiment exp;
  exp.source.lo = {3};
  exp.source.hi = {3};
  exp.n_values = {2, 7};
  exp.seeds = {1, 2};
  exp.horizon = 5;
  exp.params = mf_params(1, 1);
  exp.steps_per_delay = 8;
  auto table = run_meanfield(exp);
  CHECK(table.runs.size() == 4);
  CHECK(table.rows.size() == 4 * 6);
  for (const auto& r : table.rows) {
    CHECK(r.diameter == 0.0);
    CHECK(r.w1_vs_ref == 0.0);
  }
  CHECK(table.all_consensus());
}

TEST_CASE("run_meanfield is deterministic and ordered") {
  MeanFieldExperiment exp;
  exp.source.lo = {0};
  exp.source.hi = {10};
  exp.n_values = {10, 20};
  exp.seeds = {4, 5};
  exp.horizon = 40;
  exp.sample_interval = 2;
  exp.params = mf_params(1, 1);
  exp.steps_per_delay = 16;
  auto a = run_meanfield(exp, 1);
  auto b = run_meanfield(exp, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].n == b.rows[r].n);
    CHECK(a.rows[r].seed == b.rows[r].seed);
    CHECK(a.rows[r].t == b.rows[r].t);
    CHECK(a.rows[r].diameter == b.rows[r].diameter);
    CHECK(a.rows[r].w1_vs_ref == b.rows[r].w1_vs_ref);
  }
  CHECK(a.rows.front().n == 10);
  CHECK(a.rows.front().seed == 4);
  CHECK(a.rows.front().w1_vs_ref == 0.0);
  CHECK(a.rows.back().n == 20);
  CHECK(a.rows.back().seed == 5);
  for (const auto& run : a.runs) {
    REQUIRE(run.time_to_half.has_value());
    CHECK(*run.time_to_half > 0.0);
  }
  // the diameter never exceeds its initial value
  for (const auto& r : a.rows) {
    const auto& run = *std::find_if(a.runs.begin(), a.runs.end(), [&](const MeanFieldRun& x) {
      return x.n == r.n && x.seed == r.seed;
    });
    CHECK(r.diameter <= run.initial_diameter + 1e-9);
  }
}

TEST_CASE("stability probe") {
  const auto p = mf_params(1, 1);
  Rng rng(9);
  Positions base(30, 1);
  for (auto& v : base.flat()) v = rng.uniform(0, 10);

  CHECK(stability_probe(p, base, 0.0, 10, Perturbation::RandomDirections, 1).ratio == 0.0);

  auto shift = stability_probe(p, base, 0.5, 10, Perturbation::UniformShift, 1, 16);
  CHECK(shift.initial_w1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(shift.ratio == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> ratios;
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    auto r = stability_probe(p, base, delta, 10, Perturbation::RandomDirections, 1, 16);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio >= 1.0);
    ratios.push_back(r.ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 10.0);
  CHECK_THROWS_AS(stability_probe(p, base, -1.0, 10, Perturbation::UniformShift, 1),
                  DomainError);
}

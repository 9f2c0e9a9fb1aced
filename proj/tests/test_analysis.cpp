#include <doctest.h>

#include <cmath>
#include <vector>

#include "hkdelay/analysis.hpp"
#include "hkdelay/engine.hpp"
#include "hkdelay/errors.hpp"
#include "hkdelay/rng.hpp"

using namespace hkdelay;

namespace {

ModelParams make_params(std::size_t n, std::size_t d, double tau, InfluenceFunction f,
                        WeightScheme s = WeightScheme::Classical) {
  ModelParams p;
  p.n_agents = n;
  p.dim = d;
  p.tau = tau;
  p.influence = std::move(f);
  p.scheme = s;
  return p;
}

Trajectory simulate(const ModelParams& p, const InitialHistory& h, double t_end, int k = 32,
                    double eps = 1e-10) {
  IntegratorConfig c;
  c.steps_per_delay = k;
  c.t_end = t_end;
  c.eps_consensus = eps;
  Simulation sim(p, h, c);
  return run_until(sim, t_end);
}

const std::vector<double> kPlus{1.0};

}  // namespace

TEST_CASE("extrema of projections") {
  const auto p = make_params(2, 1, 1.0, InfluenceFunction::constant(1));
  auto traj = simulate(p, InitialHistory::constant_per_agent(Positions(2, 1, {0, 1})), 0.0);
  auto e = extrema(traj, -1.0, 0.0, kPlus);
  CHECK(e.m == 0.0);
  CHECK(e.M == 1.0);
  const std::vector<double> minus{-1.0};
  auto f = extrema(traj, -1.0, 0.0, minus);
  CHECK(f.m == -e.M);
  CHECK(f.M == -e.m);

  const auto p2 = make_params(2, 2, 1.0, InfluenceFunction::constant(1));
  auto traj2 = simulate(p2, InitialHistory::constant_per_agent(Positions(2, 2, {0, 5, 3, -1})), 0.0);
  const std::vector<double> e1{1.0, 0.0};
  auto g = extrema(traj2, 0.0, 0.0, e1);
  CHECK(g.m == 0.0);
  CHECK(g.M == 3.0);

  CHECK_THROWS_AS(extrema(traj, -1.0, 5.0, kPlus), DomainError);
  const std::vector<double> not_unit{2.0};
  CHECK_THROWS_AS(extrema(traj, -1.0, 0.0, not_unit), DomainError);
}

TEST_CASE("positive offset rule") {
  CHECK(positive_offset({-2, 3}) == 7.0);
  CHECK(positive_offset({1, 3}) == 1.0);
  CHECK(positive_offset({0, 0}) == 1.0);
  CHECK(positive_offset({5, 7}) == 0.0);
  CHECK(positive_offset({-3, -3}) == 4.0);

  const auto p = make_params(3, 2, 1.0, InfluenceFunction::power_law(1));
  auto traj = simulate(p, InitialHistory::constant_per_agent(Positions(3, 2, {-2, 0, 3, 1, 0, 4})), 2.0);
  auto [shifted, shift] = translate_positive(traj);
  CHECK(shift[0] == 7.0);
  CHECK(shift[1] == 4.0);  // m = 0, M = 4
  auto e = extrema(shifted, -1.0, 0.0, std::vector<double>{1.0, 0.0});
  CHECK(e.m == 5.0);
  CHECK(e.M == 10.0);
  // translation does not change velocities
  for (std::size_t r = 0; r < traj.size(); ++r) {
    auto a = traj.velocity(r);
    auto b = shifted.velocity(r);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST_CASE("certificate arithmetic against a high-precision evaluation") {
  // mpmath, 40 digits
  const double sigma = 0.3333333333333333333;
  const double gamma = 2.807618110407059375125e-4;
  const double gamma_minus = 0.09448956314207024985813;
  const double gamma_plus = 0.2834686894262107495744;

  const auto p = make_params(2, 1, 1.0, InfluenceFunction::constant(1));
  const auto c = certificate(1.0, 3.0, p);
  CHECK(c.psi_lower == 1.0);
  CHECK(std::abs(c.sigma - sigma) <= 1e-12 * sigma);
  CHECK(std::abs(c.gamma - gamma) <= 1e-12 * gamma);
  CHECK(std::abs(c.gamma_minus - gamma_minus) <= 1e-12 * gamma_minus);
  CHECK(std::abs(c.gamma_plus - gamma_plus) <= 1e-12 * gamma_plus);
  CHECK(c.gamma > 0.0);
  CHECK(c.gamma < 1.0);
  CHECK(c.N == 2);
  CHECK(c.m == 1.0);
  CHECK(c.M == 3.0);
}

TEST_CASE("certificate edge cases") {
  const auto p = make_params(5, 1, 2.0, InfluenceFunction::power_law(0));
  auto c = certificate(2.0, 2.0, p);
  CHECK(c.sigma == 0.0);
  CHECK(c.gamma == 0.0);
  CHECK(c.gamma_minus == 0.0);
  CHECK(c.gamma_plus == 0.0);
  CHECK(c.psi_lower == 0.25);
  CHECK(certificate(1.0, 1e6, p).psi_lower == 0.25);

  const auto q = make_params(3, 1, 1.0, InfluenceFunction::power_law(1));
  CHECK(certificate(1.0, 2.0, q).psi_lower == doctest::Approx(1.0 / 17.0 / 2.0));

  CHECK_THROWS_AS(certificate(0.0, 2.0, p), PreconditionError);
  CHECK_THROWS_AS(certificate(-1.0, 2.0, p), PreconditionError);
  const auto w = make_params(3, 1, 1.0, InfluenceFunction::power_law(1),
                             WeightScheme::NormalizedWithSelf);
  CHECK_THROWS_AS(certificate(1.0, 2.0, w), UnsupportedCertificate);
}

TEST_CASE("shrinkage factor is nonincreasing in tau once tau >= 1/3") {
  // (1 - e^{-psi tau})^2 grows with tau while e^{-6 tau} decays; the product
  // decreases once tau > ln(1 + psi/3) / psi, which is below 1/3 for psi <= 1.
  for (double beta : {0.0, 1.0, 3.0}) {
    double prev = INFINITY;
    for (double tau = 1.0 / 3.0; tau <= 20.0; tau += 0.05) {
      const auto p = make_params(4, 1, tau, InfluenceFunction::power_law(beta));
      const double g = certificate(1.0, 3.0, p).gamma;
      CHECK(g <= prev);
      prev = g;
    }
  }
  // ... but it is not monotone on all of (0, inf).
  const auto small = make_params(2, 1, 0.01, InfluenceFunction::constant(1));
  const auto larger = make_params(2, 1, 0.2, InfluenceFunction::constant(1));
  CHECK(certificate(1.0, 3.0, small).gamma < certificate(1.0, 3.0, larger).gamma);
}

TEST_CASE("contraction report for the two-agent system") {
  const auto p = make_params(2, 1, 1.0, InfluenceFunction::constant(1));
  auto traj = simulate(p, InitialHistory::constant_per_agent(Positions(2, 1, {0, 1})), 60.0, 32,
                       1e-8);
  CHECK_THROWS_AS(contraction_report(traj, kPlus, p), PreconditionError);
  auto [pos, c] = translate_positive(traj, kPlus);
  CHECK(c == 1.0);
  auto rep = contraction_report(pos, kPlus, p);
  REQUIRE(!rep.rows.empty());
  CHECK(rep.passed());
  CHECK(rep.rows.front().D_k == 1.0);
  CHECK(rep.tolerance == doctest::Approx(2e-7));
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    CHECK(rep.rows[k].D_k <= rep.rows[k - 1].D_k + rep.tolerance);

  auto speed = speed_check(pos, kPlus);
  CHECK(speed.max_speed == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(speed.pass);
  CHECK(stay_check(pos, kPlus).pass);
}

TEST_CASE("contraction report with all agents equal") {
  const auto p = make_params(4, 1, 0.5, InfluenceFunction::power_law(2));
  auto traj = simulate(p, InitialHistory::constant_per_agent(Positions(4, 1, {2, 2, 2, 2})), 7.0);
  auto [pos, c] = translate_positive(traj, kPlus);
  CHECK(c == 0.0);  // m = 2 >= D = 0 and positive
  auto rep = contraction_report(pos, kPlus, p);
  CHECK(rep.passed());
  for (const auto& row : rep.rows) CHECK(row.D_k == 0.0);
  CHECK(speed_check(pos, kPlus).max_speed == 0.0);
}

TEST_CASE("contraction report for twenty agents with a steep power law") {
  const auto p = make_params(20, 1, 2.0, InfluenceFunction::power_law(3));
  auto traj = simulate(p, InitialHistory::random_constant(42, 0, 10), 600.0, 32, 1e-8);
  auto [pos, shift] = translate_positive(traj);
  auto rep = contraction_report(pos, kPlus, p);
  CHECK(rep.rows.size() >= 10);
  CHECK(rep.passed());
  CHECK(speed_check(pos, kPlus).pass);
  CHECK(stay_check(pos, kPlus).pass);
}

TEST_CASE("contraction report needs enough time") {
  const auto p = make_params(3, 1, 1.0, InfluenceFunction::power_law(1));
  auto traj = simulate(p, InitialHistory::constant_per_agent(Positions(3, 1, {1, 2, 4})), 5.0);
  CHECK_THROWS_AS(contraction_report(traj, kPlus, p), DomainError);
}

TEST_CASE("streaming monitor matches the trajectory route") {
  const auto p = make_params(6, 2, 0.7, InfluenceFunction::power_law(1));
  IntegratorConfig c;
  c.steps_per_delay = 16;
  c.t_end = 30.0;
  Simulation sim(p, InitialHistory::random_constant(11, -3, 3), c);
  const std::vector<double> dir{0.6, 0.8};
  ProjectionMonitor mon(dir, 16);
  Trajectory traj(6, 2, 0.7, 16, 1);
  const NodeObserver obs = [&](const NodeView& v) {
    mon.observe(v);
    traj.record(v);
  };
  sim.emit_window(obs);
  traj.summary = sim.advance(30.0, obs);

  auto [pos, off] = translate_positive(traj, dir);
  std::vector<Extrema> shifted = mon.intervals();
  for (auto& e : shifted) {
    e.m += off;
    e.M += off;
  }
  auto a = contraction_report(pos, dir, p);
  std::vector<double> spreads;
  for (const auto& e : basis_directions(2)) spreads.push_back(extrema(traj, -0.7, 0.0, e).spread());
  auto b = contraction_report(shifted, p, projected_distance_bound(shifted.front().M, spreads));
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    CHECK(a.rows[k].D_k == doctest::Approx(b.rows[k].D_k).epsilon(1e-13));
    CHECK(a.rows[k].gamma_tilde == doctest::Approx(b.rows[k].gamma_tilde).epsilon(1e-13));
  }
  CHECK(a.passed());
  CHECK(mon.max_speed() == doctest::Approx(speed_check(pos, dir).max_speed).epsilon(1e-15));
}

TEST_CASE("projection reduction bound") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    Positions p(7, 3);
    for (auto& v : p.flat()) v = rng.uniform(-4, 4);
    CHECK(projection_reduction_holds(p, 1e-12));
  }
}

TEST_CASE("stay check flags an excursion") {
  CHECK(stay_check(Extrema{0, 1}, Extrema{0, 1}).pass);
  CHECK(stay_check(Extrema{0, 1}, Extrema{-1e-10, 1}).pass);
  CHECK_FALSE(stay_check(Extrema{0, 1}, Extrema{-1e-8, 1}).pass);
  CHECK_FALSE(stay_check(Extrema{0, 1}, Extrema{0, 1.01}).pass);
}

#include "hkdelay/verification.hpp"

#include <algorithm>
#include <cmath>

#include "hkdelay/errors.hpp"

namespace hkdelay {

bool DirectionVerdict::passed() const noexcept {
  return stay.pass && speed.pass && (!contraction || contraction->passed());
}

bool VerifiedRun::certificates_supported() const noexcept {
  return std::all_of(directions.begin(), directions.end(),
                     [](const DirectionVerdict& d) { return d.contraction.has_value(); });
}

bool VerifiedRun::passed() const noexcept {
  return std::all_of(directions.begin(), directions.end(),
                     [](const DirectionVerdict& d) { return d.passed(); });
}

std::optional<double> VerifiedRun::min_gamma_tilde() const noexcept {
  std::optional<double> best;
  for (const auto& d : directions) {
    if (!d.contraction || d.contraction->rows.empty()) continue;
    const double g = d.contraction->min_gamma_tilde();
    best = best ? std::min(*best, g) : g;
  }
  return best;
}

VerifiedRun verified_run(const ModelParams& params, const InitialHistory& history,
                         const IntegratorConfig& cfg,
                         const std::vector<std::vector<double>>& directions,
                         const NodeObserver& extra) {
  for (const auto& dir : directions) {
    double s2 = 0.0;
    for (double c : dir) s2 += c * c;
    if (dir.size() != params.dim || std::abs(std::sqrt(s2) - 1.0) > 1e-12)
      throw DomainError("direction must be a unit vector of dimension " +
                        std::to_string(params.dim));
  }

  Simulation sim(params, history, cfg);
  std::vector<ProjectionMonitor> monitors;
  for (const auto& dir : directions) monitors.emplace_back(dir, cfg.steps_per_delay);
  std::vector<ProjectionMonitor> basis;
  if (params.dim > 1)
    for (auto& e : basis_directions(params.dim)) basis.emplace_back(std::move(e), cfg.steps_per_delay);

  const NodeObserver obs = [&](const NodeView& v) {
    for (auto& m : monitors) m.observe(v);
    for (auto& m : basis) m.observe(v);
    if (extra) extra(v);
  };
  sim.emit_window(obs);
  VerifiedRun out;
  out.summary = sim.advance(cfg.t_end, obs);
  out.diagnostics = sim.diagnostics();

  const bool certify = params.scheme != WeightScheme::NormalizedWithSelf;
  for (const auto& mon : monitors) {
    DirectionVerdict v;
    v.direction = mon.direction();
    v.offset = positive_offset(mon.initial());
    const auto shift = [&](Extrema e) { return Extrema{e.m + v.offset, e.M + v.offset}; };
    const Extrema initial = shift(mon.initial());
    v.stay = stay_check(initial, out.summary.end_time > 0.0 ? shift(mon.forward_envelope()) : initial);
    v.speed.max_speed = mon.max_speed();
    v.speed.bound = initial.M;
    v.speed.pass = v.speed.max_speed <= v.speed.bound + 1e-9;

    if (certify) {
      if (mon.intervals().size() < 2 && !out.summary.consensus)
        throw DomainError("insufficient time range: the run must reach t = 6 tau");
      std::vector<Extrema> intervals;
      for (const auto& e : mon.intervals()) intervals.push_back(shift(e));
      std::optional<double> bound;
      if (!basis.empty()) {
        std::vector<double> spreads;
        for (const auto& b : basis) spreads.push_back(b.initial().spread());
        bound = projected_distance_bound(initial.M, spreads);
      }
      v.contraction = contraction_report(intervals, params, bound);
    }
    out.directions.push_back(std::move(v));
  }
  return out;
}

}  // namespace hkdelay

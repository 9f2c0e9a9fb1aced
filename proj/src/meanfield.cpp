#include "hkdelay/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hkdelay/engine.hpp"
#include "hkdelay/errors.hpp"
#include "hkdelay/geometry.hpp"
#include "hkdelay/parallel.hpp"

namespace hkdelay {

double w1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DomainError("w1_1d needs samples of equal length (uniform weights)");
  if (a.empty()) throw DomainError("w1_1d of empty samples");
  if (!std::is_sorted(a.begin(), a.end()) || !std::is_sorted(b.begin(), b.end()))
    throw DomainError("w1_1d needs sorted samples");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double w1_projected(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.size() != nu.size()) throw DomainError("w1_projected needs equal atom counts");
  if (mu.dim() != nu.dim()) throw DomainError("w1_projected needs equal dimensions");
  const std::size_t n = mu.size();
  std::vector<double> a(n), b(n);
  double best = 0.0;
  for (std::size_t c = 0; c < mu.dim(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = mu.atoms(i, c);
      b[i] = nu.atoms(i, c);
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    best = std::max(best, w1_1d(a, b));
  }
  return best;
}

// ---------------------------------------------------------------------------

void SourceDensity::validate() const {
  if (lo.empty() || lo.size() != hi.size())
    throw ConfigError("meanfield.source.lo and hi must be non-empty and of equal length");
  for (std::size_t c = 0; c < lo.size(); ++c)
    if (!std::isfinite(lo[c]) || !std::isfinite(hi[c]) || lo[c] > hi[c])
      throw ConfigError("meanfield.source box must satisfy lo <= hi (finite)");
  if (kind == Kind::Gaussian) {
    if (mean.size() != lo.size() || scale.size() != lo.size())
      throw ConfigError("meanfield.source.mean and scale must match the box dimension");
    for (std::size_t c = 0; c < lo.size(); ++c)
      if (!std::isfinite(scale[c]) || scale[c] < 0.0 || !std::isfinite(mean[c]))
        throw ConfigError("meanfield.source.scale must be finite and >= 0");
  }
}

Positions SourceDensity::sample(std::size_t n, Rng& rng) const {
  const std::size_t d = dim();
  Positions p(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      if (kind == Kind::UniformBox) {
        p(i, c) = rng.uniform(lo[c], hi[c]);
        continue;
      }
      if (scale[c] == 0.0 || lo[c] == hi[c]) {
        p(i, c) = std::clamp(mean[c], lo[c], hi[c]);
        continue;
      }
      double v;
      int tries = 0;
      do {
        v = mean[c] + scale[c] * rng.normal();
        if (++tries > 100000)
          throw ConfigError("meanfield.source: truncation box has negligible Gaussian mass");
      } while (v < lo[c] || v > hi[c]);
      p(i, c) = v;
    }
  }
  return p;
}

void MeanFieldExperiment::validate() const {
  source.validate();
  if (n_values.empty()) throw ConfigError("meanfield.n_values must not be empty");
  for (auto n : n_values)
    if (n < 2) throw ConfigError("meanfield.n_values entries must be >= 2");
  if (seeds.empty()) throw ConfigError("meanfield.seeds must not be empty");
  if (!std::isfinite(horizon) || horizon <= 0.0) throw ConfigError("meanfield.horizon must be > 0");
  if (!std::isfinite(sample_interval) || sample_interval <= 0.0)
    throw ConfigError("meanfield.sample_interval must be > 0");
  if (steps_per_delay < 4) throw ConfigError("integrator.steps_per_delay must be >= 4");
  if (!std::isfinite(params.tau) || params.tau <= 0.0) throw ConfigError("model.tau must be > 0");
}

bool MeanFieldTable::all_consensus() const noexcept {
  return std::all_of(runs.begin(), runs.end(), [](const MeanFieldRun& r) { return r.consensus; });
}

std::optional<double> MeanFieldTable::half_time_spread() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : runs) {
    if (!r.time_to_half) return std::nullopt;
    lo = std::min(lo, *r.time_to_half);
    hi = std::max(hi, *r.time_to_half);
  }
  if (runs.empty()) return std::nullopt;
  if (lo == 0.0) return hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return hi / lo;
}

std::vector<std::pair<std::size_t, double>> MeanFieldTable::mean_half_time_by_n() const {
  std::vector<std::pair<std::size_t, double>> means;
  std::vector<std::size_t> counts;
  for (const auto& r : runs) {
    if (!r.time_to_half) continue;
    auto it = std::find_if(means.begin(), means.end(), [&](const auto& m) { return m.first == r.n; });
    if (it == means.end()) {
      means.emplace_back(r.n, 0.0);
      counts.push_back(0);
      it = means.end() - 1;
    }
    it->second += *r.time_to_half;
    ++counts[static_cast<std::size_t>(it - means.begin())];
  }
  for (std::size_t i = 0; i < means.size(); ++i) means[i].second /= static_cast<double>(counts[i]);
  return means;
}

std::optional<double> MeanFieldTable::half_time_spread_across_n() const {
  if (runs.empty()) return std::nullopt;
  for (const auto& r : runs)
    if (!r.time_to_half) return std::nullopt;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& [n, t] : mean_half_time_by_n()) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (lo == 0.0) return hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return hi / lo;
}

namespace {

struct RunOutput {
  MeanFieldRun run;
  std::vector<double> times;
  std::vector<double> diameters;
  std::vector<Positions> snapshots;
};

RunOutput run_one(const MeanFieldExperiment& exp, std::size_t n, std::uint64_t seed) {
  ModelParams params = exp.params;
  params.n_agents = n;
  params.dim = exp.source.dim();
  Rng rng(seed);
  const Positions atoms = exp.source.sample(n, rng);

  IntegratorConfig cfg;
  cfg.steps_per_delay = exp.steps_per_delay;
  cfg.t_end = exp.horizon;
  cfg.eps_consensus = exp.eps_consensus;
  cfg.stop_at_consensus = false;
  Simulation sim(params, InitialHistory::constant_per_agent(atoms), cfg);

  const double h = sim.step_size();
  const auto stride =
      std::max<NodeIndex>(1, static_cast<NodeIndex>(std::llround(exp.sample_interval / h)));
  const NodeIndex origin = exp.steps_per_delay;

  RunOutput out;
  out.run.n = n;
  out.run.seed = seed;
  auto obs = [&](const NodeView& v) {
    if (v.index < origin) return;
    if (v.index == origin) out.run.initial_diameter = v.diameter;
    if (!out.run.time_to_half && v.diameter <= 0.5 * out.run.initial_diameter)
      out.run.time_to_half = v.time;
    if ((v.index - origin) % stride == 0) {
      out.times.push_back(v.time);
      out.diameters.push_back(v.diameter);
      out.snapshots.emplace_back(n, params.dim,
                                 std::vector<double>(v.position.begin(), v.position.end()));
    }
  };
  sim.emit_window(obs);
  const auto summary = sim.advance(exp.horizon, obs);
  out.run.final_diameter = summary.final_diameter;
  out.run.consensus = summary.consensus;
  out.run.consensus_time = summary.consensus_time;
  return out;
}

}  // namespace

MeanFieldTable run_meanfield(const MeanFieldExperiment& exp, unsigned jobs) {
  exp.validate();
  const std::size_t cells = exp.n_values.size() * exp.seeds.size();
  std::vector<RunOutput> outputs(cells);
  parallel_for(cells, jobs, [&](std::size_t c) {
    outputs[c] = run_one(exp, exp.n_values[c / exp.seeds.size()], exp.seeds[c % exp.seeds.size()]);
  });

  MeanFieldTable table;
  for (std::size_t c = 0; c < cells; ++c) {
    const auto& out = outputs[c];
    const auto& ref = outputs[c - c % exp.seeds.size()];
    table.runs.push_back(out.run);
    for (std::size_t r = 0; r < out.times.size(); ++r) {
      MeanFieldRow row;
      row.n = out.run.n;
      row.seed = out.run.seed;
      row.t = out.times[r];
      row.diameter = out.diameters[r];
      row.w1_vs_ref = w1_projected(EmpiricalMeasure{out.snapshots[r], row.t},
                                   EmpiricalMeasure{ref.snapshots[r], row.t});
      table.rows.push_back(row);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

StabilityResult stability_probe(const ModelParams& params, const Positions& base, double delta,
                                double horizon, Perturbation kind, std::uint64_t seed,
                                int steps_per_delay) {
  if (!std::isfinite(delta) || delta < 0.0) throw DomainError("delta must be >= 0");
  if (!std::isfinite(horizon) || horizon < 0.0) throw DomainError("horizon must be >= 0");
  StabilityResult res;
  if (delta == 0.0) return res;

  const std::size_t n = base.size();
  const std::size_t d = base.dim();
  Positions moved = base;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> u(d, 0.0);
    if (kind == Perturbation::UniformShift) {
      u[0] = 1.0;
    } else {
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& x : u) {
          x = rng.normal();
          norm += x * x;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (auto& x : u) x /= norm;
    }
    for (std::size_t c = 0; c < d; ++c) moved(i, c) += delta * u[c];
  }

  ModelParams p = params;
  p.n_agents = n;
  p.dim = d;
  IntegratorConfig cfg;
  cfg.steps_per_delay = steps_per_delay;
  cfg.t_end = horizon;
  cfg.stop_at_consensus = false;
  Simulation a(p, InitialHistory::constant_per_agent(base), cfg);
  Simulation b(p, InitialHistory::constant_per_agent(moved), cfg);

  auto w1_now = [&] {
    auto xa = a.positions();
    auto xb = b.positions();
    return w1_projected(
        EmpiricalMeasure{Positions(n, d, std::vector<double>(xa.begin(), xa.end())), a.time()},
        EmpiricalMeasure{Positions(n, d, std::vector<double>(xb.begin(), xb.end())), b.time()});
  };
  // Constant histories: the initial window distance equals the one at t = 0.
  res.initial_w1 = w1_now();
  res.max_w1 = res.initial_w1;
  while (a.time() < horizon - 0.5 * a.step_size()) {
    a.step();
    b.step();
    res.max_w1 = std::max(res.max_w1, w1_now());
  }
  res.ratio = res.initial_w1 > 0.0 ? res.max_w1 / res.initial_w1 : 0.0;
  return res;
}

}  // namespace hkdelay

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hkdelay/model.hpp"
#include "hkdelay/rng.hpp"

namespace hkdelay {

/// Uniform-weight atomic measure (1/N) sum_i delta_{x_i}.
struct EmpiricalMeasure {
  Positions atoms;
  double time_label = 0.0;

  std::size_t size() const noexcept { return atoms.size(); }
  std::size_t dim() const noexcept { return atoms.dim(); }
};

/// Exact 1-Wasserstein distance between two sorted samples of equal length:
/// the order-statistics coupling (1/N) sum |a_(i) - b_(i)|.
double w1_1d(std::span<const double> a, std::span<const double> b);

/// Max over coordinate directions of the 1D distance between projected
/// samples. A lower bound on the Euclidean W1; exact for d = 1.
double w1_projected(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Compactly supported sampler for the initial density.
struct SourceDensity {
  enum class Kind { UniformBox, Gaussian };
  Kind kind = Kind::UniformBox;
  std::vector<double> lo, hi;          // support box per dimension
  std::vector<double> mean, scale;     // Gaussian only; truncated to the box

  std::size_t dim() const noexcept { return lo.size(); }
  void validate() const;
  /// N atoms, agent by agent, coordinate by coordinate. Gaussian coordinates
  /// are redrawn until they fall inside the box.
  Positions sample(std::size_t n, Rng& rng) const;
};

struct MeanFieldExperiment {
  SourceDensity source;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds;
  double horizon = 0.0;
  double sample_interval = 1.0;  // spacing of table rows, rounded to grid nodes
  ModelParams params;            // n_agents and dim are overridden per run
  int steps_per_delay = 64;
  double eps_consensus = 1e-8;

  void validate() const;
};

struct MeanFieldRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double t = 0.0;
  double diameter = 0.0;
  double w1_vs_ref = 0.0;  // against the first seed's run with the same N
};

struct MeanFieldRun {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double initial_diameter = 0.0;
  std::optional<double> time_to_half;  // first t >= 0 with diameter <= initial / 2
  double final_diameter = 0.0;
  bool consensus = false;
  double consensus_time = 0.0;
};

struct MeanFieldTable {
  std::vector<MeanFieldRow> rows;  // ordered by (N, seed, t) as listed in the experiment
  std::vector<MeanFieldRun> runs;

  bool all_consensus() const noexcept;
  /// max / min of time_to_half over all runs; nullopt if any run never halved.
  std::optional<double> half_time_spread() const;
  /// Mean time_to_half per N (over seeds), in order of first appearance.
  std::vector<std::pair<std::size_t, double>> mean_half_time_by_n() const;
  /// max / min of the per-N means; nullopt if any run never halved.
  std::optional<double> half_time_spread_across_n() const;
};

MeanFieldTable run_meanfield(const MeanFieldExperiment& exp, unsigned jobs = 1);

enum class Perturbation {
  RandomDirections,  // each atom moved by delta along its own random unit vector
  UniformShift,      // every atom moved by delta along e_1
};

struct StabilityResult {
  double initial_w1 = 0.0;  // max over s in [-tau, 0]
  double max_w1 = 0.0;      // max over t in [0, T]
  double ratio = 0.0;
};

/// Empirical Lipschitz ratio of two particle solutions whose constant
/// initial histories are coupled atom by atom at distance delta.
StabilityResult stability_probe(const ModelParams& params, const Positions& base, double delta,
                                double horizon, Perturbation kind, std::uint64_t seed,
                                int steps_per_delay = 64);

}  // namespace hkdelay

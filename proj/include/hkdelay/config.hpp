#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hkdelay/engine.hpp"
#include "hkdelay/meanfield.hpp"
#include "hkdelay/model.hpp"

namespace hkdelay {

/// Initial history as written in a config file.
struct HistorySpec {
  enum class Kind { Constant, UniformBox };
  Kind kind = Kind::Constant;
  std::vector<std::vector<double>> positions;  // Constant: one row per agent
  double lo = 0.0, hi = 0.0;                   // UniformBox: every coordinate

  bool operator==(const HistorySpec&) const = default;
};

struct SweepGrid {
  std::vector<double> tau;
  std::vector<double> beta;  // requires a power-law influence
  std::vector<std::size_t> n_agents;
  std::vector<std::uint64_t> seeds;

  bool operator==(const SweepGrid&) const = default;
};

struct MeanFieldSpec {
  SourceDensity source;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds;
  double horizon = 0.0;
  double sample_interval = 1.0;

  bool operator==(const MeanFieldSpec&) const;
};

struct OutputNames {
  std::string trajectory = "trajectory.csv";
  std::string summary = "summary.json";
  std::string report = "report.csv";
  std::string certificate = "certificate.json";
  std::string sweep = "sweep.csv";
  std::string meanfield = "meanfield.csv";

  bool operator==(const OutputNames&) const = default;
};

/// Everything one invocation of the command-line tool needs.
///
/// Sections other than `model` are optional in the file; each command checks
/// for the ones it uses. Defaults exist only for steps_per_delay (64),
/// record_stride (1), eps_consensus (1e-8), stop_at_consensus (true), the
/// basis directions and the output file names.
struct RunConfig {
  ModelParams model;
  int steps_per_delay = 64;
  std::optional<double> t_end;
  int record_stride = 1;
  bool stop_at_consensus = true;
  double eps_consensus = 1e-8;
  std::optional<HistorySpec> history;
  std::vector<std::vector<double>> directions;  // empty: basis directions
  std::optional<std::uint64_t> seed;
  OutputNames output;
  std::optional<SweepGrid> sweep;
  std::optional<MeanFieldSpec> meanfield;

  /// Integrator settings; throws ConfigError when t_end is absent.
  IntegratorConfig integrator() const;
  /// Initial history; throws ConfigError when the section is absent.
  InitialHistory initial_history() const;
  /// Explicit directions, or e_1..e_d.
  std::vector<std::vector<double>> analysis_directions() const;
  MeanFieldExperiment meanfield_experiment() const;

  bool operator==(const RunConfig&) const;
};

/// Parses YAML text. Every error is a ConfigError carrying the 1-based line
/// of the offending node and the dotted name of the field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical YAML form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

}  // namespace hkdelay

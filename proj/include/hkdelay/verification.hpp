#pragma once

#include <optional>
#include <vector>

#include "hkdelay/analysis.hpp"
#include "hkdelay/engine.hpp"

namespace hkdelay {

/// Outcome of the bound checks along one unit direction. All extrema are
/// already translated by `offset` so the initial minimum is positive.
struct DirectionVerdict {
  std::vector<double> direction;
  double offset = 0.0;
  StayCheck stay;
  SpeedCheck speed;
  std::optional<ContractionReport> contraction;  // empty for NormalizedWithSelf

  bool passed() const noexcept;
};

struct VerifiedRun {
  RunSummary summary;
  WeightDiagnostics diagnostics;
  std::vector<DirectionVerdict> directions;

  bool certificates_supported() const noexcept;
  bool passed() const noexcept;
  /// min Gamma-tilde over every direction's rows; nullopt without rows.
  std::optional<double> min_gamma_tilde() const noexcept;
};

/// Integrates one configuration up to cfg.t_end (or consensus) while
/// streaming every node through projection monitors, then evaluates the
/// stay, speed and contraction checks per direction. Nothing is stored but
/// the per-interval extrema, so horizons are limited only by time.
///
/// Throws DomainError when a direction is not a unit vector of the right
/// dimension, or when the run neither reached t = 6 tau nor consensus.
VerifiedRun verified_run(const ModelParams& params, const InitialHistory& history,
                         const IntegratorConfig& cfg,
                         const std::vector<std::vector<double>>& directions,
                         const NodeObserver& extra = {});

}  // namespace hkdelay

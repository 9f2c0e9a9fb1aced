#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hkdelay/engine.hpp"
#include "hkdelay/model.hpp"

namespace hkdelay {

/// Minimum and maximum of the projection x_i(t) . xi over agents and grid
/// times of a window.
struct Extrema {
  double m = 0.0;
  double M = 0.0;
  double spread() const noexcept { return M - m; }
};

/// Proof constants of the diameter-shrinkage estimate for one configuration.
struct ShrinkageCertificate {
  double psi_lower = 0.0;    // min of psi on [0, distance_bound], divided by N-1
  double sigma = 0.0;        // min{tau, (M - m) / (2M)}
  double gamma = 0.0;        // (1 - e^{-psi_lower tau})^2 (1 - e^{-sigma}) e^{-6 tau} psi_lower
  double gamma_minus = 0.0;  // psi_lower (1 - e^{-sigma}) (1 - m/M) / 2
  double gamma_plus = 0.0;   // psi_lower (1 - e^{-sigma}) (M/m - 1) / 2
  double tau = 0.0;
  double m = 0.0;
  double M = 0.0;
  std::size_t N = 0;
  double distance_bound = 0.0;

  /// Shrinkage factor as a function of the current spread D, with
  /// sigma(D) = min{tau, D / (2M)} and everything else frozen.
  double gamma_tilde(double spread) const noexcept;
  /// Same formula with sigma = min{tau, D / (2 M_k)}.
  double gamma_at(double spread, double upper) const noexcept;
};

/// 1 - e^{-x}, accurate for small x.
double one_minus_exp(double x) noexcept;

/// Shrinkage constants for extrema 0 < m <= M. `distance_bound` is the range
/// on which psi is minimized; it defaults to 2M, which bounds every pairwise
/// distance of a one-dimensional configuration inside [m, M].
ShrinkageCertificate certificate(double m, double M, const ModelParams& params,
                                 std::optional<double> distance_bound = {});

/// Diameter of a point set (exact pairwise scan).
double diameter(const Positions& p);

/// Extrema of x . direction over records with time in [t0, t1].
Extrema extrema(const Trajectory& traj, double t0, double t1, std::span<const double> direction);

/// Offset c that makes the initial-window minimum positive: zero when
/// m >= D already, else D - m, or 1 - m when all agents coincide (D = 0).
double positive_offset(const Extrema& initial) noexcept;

/// Copy of the trajectory shifted by a constant vector (dynamics are
/// translation invariant, velocities are unchanged).
Trajectory translate(const Trajectory& traj, std::span<const double> shift);

/// Shifts every basis coordinate by its positive_offset; returns the shifted
/// trajectory and the shift vector.
std::pair<Trajectory, std::vector<double>> translate_positive(const Trajectory& traj);

/// Shifts along a unit direction xi by c * xi so the projection onto xi has a
/// positive initial minimum.
std::pair<Trajectory, double> translate_positive(const Trajectory& traj,
                                                 std::span<const double> direction);

/// Streaming accumulator of projected extrema. Feed nodes in increasing
/// index order, starting at t = -tau.
///
/// Tracks the initial window, every completed interval I_k = [(6k-1)tau, 6k tau]
/// (I_0 is the initial window), the envelope over t >= 0 and the largest
/// projected speed over t >= 0.
class ProjectionMonitor {
 public:
  ProjectionMonitor(std::vector<double> direction, int steps_per_delay);

  void observe(const NodeView& node);

  const std::vector<double>& direction() const noexcept { return dir_; }
  bool has_initial() const noexcept { return !intervals_.empty(); }
  const Extrema& initial() const;
  /// Completed intervals I_0, I_1, ...
  const std::vector<Extrema>& intervals() const noexcept { return intervals_; }
  /// Envelope of the projection over nodes with t >= 0.
  const Extrema& forward_envelope() const noexcept { return forward_; }
  double max_speed() const noexcept { return max_speed_; }
  NodeIndex last_index() const noexcept { return last_; }

 private:
  std::vector<double> dir_;
  NodeIndex k_;
  NodeIndex last_ = -1;
  std::vector<Extrema> intervals_;
  std::optional<Extrema> open_;
  NodeIndex open_end_ = 0;
  Extrema forward_{};
  bool forward_seen_ = false;
  double max_speed_ = 0.0;
};

struct ContractionRow {
  int k = 0;
  double m_k = 0.0, M_k = 0.0, D_k = 0.0;
  double sigma_k = 0.0, gamma_k = 0.0, gamma_tilde = 0.0;
  double bound_rhs = 0.0;  // (1 - gamma_tilde) D_k
  double m_next = 0.0, M_next = 0.0, D_next = 0.0;
  bool claim_pass = true;   // I_{k+1} inside [m_k + G D_k / 2, M_k - G D_k / 2] +- tol
  bool shrink_pass = true;  // D_{k+1} <= (1 - G) D_k + tol
  bool pass = true;
};

struct ContractionReport {
  ShrinkageCertificate certificate;
  std::vector<ContractionRow> rows;
  double tolerance = 0.0;  // 1e-7 (1 + D_0)

  bool passed() const noexcept;
  std::optional<std::size_t> first_failure() const noexcept;
  double min_gamma_tilde() const noexcept;
};

/// Contraction check from interval extrema that are already translated so
/// the initial minimum is positive. Row k compares I_k with I_{k+1}.
ContractionReport contraction_report(std::span<const Extrema> intervals, const ModelParams& params,
                                     std::optional<double> distance_bound = {});

/// Trajectory route: the trajectory must start at -tau and be translated
/// positive along `direction`. Throws PreconditionError when m <= 0 and
/// DomainError when it neither reaches t = 6 tau nor ended in consensus.
ContractionReport contraction_report(const Trajectory& traj, std::span<const double> direction,
                                     const ModelParams& params,
                                     std::optional<double> distance_bound = {});

struct SpeedCheck {
  double max_speed = 0.0;
  double bound = 0.0;  // M of the translated initial window
  bool pass = true;    // max_speed <= bound + 1e-9
};

/// Largest |d(x_i . xi)/dt| over records with t >= 0 against M.
SpeedCheck speed_check(const Trajectory& traj, std::span<const double> direction);

struct StayCheck {
  Extrema initial;
  Extrema forward;
  double tolerance = 0.0;  // 1e-9 (M - m + 1)
  bool pass = true;
};

StayCheck stay_check(const Extrema& initial, const Extrema& forward);
StayCheck stay_check(const Trajectory& traj, std::span<const double> direction);

/// Range bound for psi when projecting a d-dimensional system on one
/// direction: the larger of 2M and the Euclidean length of the per-coordinate
/// initial spreads.
double projected_distance_bound(double M, std::span<const double> coordinate_spreads);

/// Euclidean diameter <= sqrt(d) * max coordinate-projected diameter + tol.
bool projection_reduction_holds(const Positions& p, double tol);

/// All basis directions e_0, ..., e_{d-1}.
std::vector<std::vector<double>> basis_directions(std::size_t dim);

}  // namespace hkdelay

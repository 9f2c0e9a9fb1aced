#include "hkdelay/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hkdelay/errors.hpp"
#include "hkdelay/geometry.hpp"

namespace hkdelay {

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += a[c] * b[c];
  return s;
}

void check_direction(std::span<const double> direction, std::size_t dim) {
  if (direction.size() != dim) throw DomainError("direction has wrong dimension");
  const double norm = std::sqrt(dot(direction, direction));
  if (!(std::abs(norm - 1.0) <= 1e-12)) throw DomainError("direction must be a unit vector");
}

NodeView view_of(const Trajectory& traj, std::size_t r) {
  return NodeView{traj.node_index(r), traj.time(r), traj.position(r), traj.velocity(r), 0.0};
}

ProjectionMonitor monitor_of(const Trajectory& traj, std::span<const double> direction) {
  check_direction(direction, traj.dim());
  ProjectionMonitor mon({direction.begin(), direction.end()}, traj.steps_per_delay());
  for (std::size_t r = 0; r < traj.size(); ++r) mon.observe(view_of(traj, r));
  return mon;
}

}  // namespace

double one_minus_exp(double x) noexcept { return -std::expm1(-x); }

double ShrinkageCertificate::gamma_at(double spread, double upper) const noexcept {
  if (!(spread > 0.0) || !(upper > 0.0)) return 0.0;
  const double s = std::min(tau, spread / (2.0 * upper));
  const double a = one_minus_exp(psi_lower * tau);
  return a * a * one_minus_exp(s) * std::exp(-6.0 * tau) * psi_lower;
}

double ShrinkageCertificate::gamma_tilde(double spread) const noexcept {
  return gamma_at(spread, M);
}

ShrinkageCertificate certificate(double m, double M, const ModelParams& params,
                                 std::optional<double> distance_bound) {
  if (params.scheme == WeightScheme::NormalizedWithSelf)
    throw UnsupportedCertificate(
        "shrinkage certificates are defined for the classical and normalized_no_self schemes only");
  if (!std::isfinite(m) || !std::isfinite(M)) throw DomainError("extrema must be finite");
  if (!(m > 0.0))
    throw PreconditionError("certificate requires m > 0; apply translate_positive first");
  if (m > M) throw PreconditionError("certificate requires m <= M");
  params.validate();

  ShrinkageCertificate c;
  c.tau = params.tau;
  c.m = m;
  c.M = M;
  c.N = params.n_agents;
  c.distance_bound = distance_bound.value_or(2.0 * M);
  c.psi_lower = params.influence.min_on(c.distance_bound) / static_cast<double>(params.n_agents - 1);
  if (m == M) return c;  // already in consensus: sigma = Gamma = gamma_pm = 0

  c.sigma = std::min(params.tau, (M - m) / (2.0 * M));
  const double a = one_minus_exp(c.psi_lower * c.tau);
  const double b = one_minus_exp(c.sigma);
  c.gamma = a * a * b * std::exp(-6.0 * c.tau) * c.psi_lower;
  c.gamma_minus = 0.5 * c.psi_lower * b * (1.0 - m / M);
  c.gamma_plus = 0.5 * c.psi_lower * b * (M / m - 1.0);
  return c;
}

double diameter(const Positions& p) { return diameter(p.flat(), p.size(), p.dim()); }

Extrema extrema(const Trajectory& traj, double t0, double t1, std::span<const double> direction) {
  check_direction(direction, traj.dim());
  if (traj.empty() || t0 > t1 || t0 < traj.start_time() || t1 > traj.end_time())
    throw DomainError("window outside the recorded range");
  Extrema e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const std::size_t d = traj.dim();
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const double t = traj.time(r);
    if (t < t0 || t > t1) continue;
    auto x = traj.position(r);
    for (std::size_t i = 0; i < traj.agents(); ++i) {
      const double p = dot(x.subspan(i * d, d), direction);
      e.m = std::min(e.m, p);
      e.M = std::max(e.M, p);
    }
  }
  if (e.m > e.M) throw DomainError("window contains no recorded node");
  return e;
}

double positive_offset(const Extrema& initial) noexcept {
  const double spread = initial.spread();
  if (initial.m > 0.0 && initial.m >= spread) return 0.0;
  return spread - initial.m + (spread == 0.0 ? 1.0 : 0.0);
}

Trajectory translate(const Trajectory& traj, std::span<const double> shift) {
  return traj.shifted(shift);
}

std::pair<Trajectory, std::vector<double>> translate_positive(const Trajectory& traj) {
  if (traj.empty()) throw DomainError("empty trajectory");
  std::vector<double> shift(traj.dim(), 0.0);
  const double t0 = traj.start_time();
  const double t_init = std::min(0.0, traj.end_time());
  for (std::size_t c = 0; c < traj.dim(); ++c) {
    std::vector<double> e(traj.dim(), 0.0);
    e[c] = 1.0;
    shift[c] = positive_offset(extrema(traj, t0, t_init, e));
  }
  return {traj.shifted(shift), shift};
}

std::pair<Trajectory, double> translate_positive(const Trajectory& traj,
                                                 std::span<const double> direction) {
  if (traj.empty()) throw DomainError("empty trajectory");
  const double c =
      positive_offset(extrema(traj, traj.start_time(), std::min(0.0, traj.end_time()), direction));
  std::vector<double> shift(direction.begin(), direction.end());
  for (double& s : shift) s *= c;
  return {traj.shifted(shift), c};
}

// ---------------------------------------------------------------------------

ProjectionMonitor::ProjectionMonitor(std::vector<double> direction, int steps_per_delay)
    : dir_(std::move(direction)), k_(steps_per_delay) {}

const Extrema& ProjectionMonitor::initial() const {
  if (intervals_.empty()) throw DomainError("initial window not observed yet");
  return intervals_.front();
}

void ProjectionMonitor::observe(const NodeView& node) {
  if (last_ < 0 && node.index != 0)
    throw DomainError("projection monitor must start at t = -tau (node 0)");
  if (node.index <= last_) throw DomainError("nodes must arrive in increasing order");
  last_ = node.index;

  const std::size_t d = dir_.size();
  const std::size_t n = node.position.size() / d;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = dot(node.position.subspan(i * d, d), dir_);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }

  // A node past the end of the open interval closes it (strided records may
  // skip the end node itself).
  if (open_ && node.index > open_end_) {
    intervals_.push_back(*open_);
    open_.reset();
  }
  const NodeIndex period = 6 * k_;
  const NodeIndex k = node.index / period;
  const NodeIndex start = k * period;
  if (node.index - start <= k_) {
    if (!open_) {
      open_ = Extrema{lo, hi};
      open_end_ = start + k_;
    } else {
      open_->m = std::min(open_->m, lo);
      open_->M = std::max(open_->M, hi);
    }
    if (node.index == open_end_) {
      intervals_.push_back(*open_);
      open_.reset();
    }
  }

  if (node.index >= k_) {
    if (!forward_seen_) {
      forward_ = Extrema{lo, hi};
      forward_seen_ = true;
    } else {
      forward_.m = std::min(forward_.m, lo);
      forward_.M = std::max(forward_.M, hi);
    }
    for (std::size_t i = 0; i < n; ++i)
      max_speed_ = std::max(max_speed_, std::abs(dot(node.velocity.subspan(i * d, d), dir_)));
  }
}

// ---------------------------------------------------------------------------

bool ContractionReport::passed() const noexcept { return !first_failure().has_value(); }

std::optional<std::size_t> ContractionReport::first_failure() const noexcept {
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (!rows[r].pass) return r;
  return std::nullopt;
}

double ContractionReport::min_gamma_tilde() const noexcept {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) g = std::min(g, r.gamma_tilde);
  return g;
}

ContractionReport contraction_report(std::span<const Extrema> intervals, const ModelParams& params,
                                     std::optional<double> distance_bound) {
  if (intervals.empty()) throw DomainError("contraction report needs the initial window");
  ContractionReport rep;
  const Extrema& first = intervals.front();
  rep.certificate = certificate(first.m, first.M, params, distance_bound);
  rep.tolerance = 1e-7 * (1.0 + first.spread());
  const auto& cert = rep.certificate;
  for (std::size_t k = 0; k + 1 < intervals.size(); ++k) {
    const Extrema& cur = intervals[k];
    const Extrema& next = intervals[k + 1];
    ContractionRow row;
    row.k = static_cast<int>(k);
    row.m_k = cur.m;
    row.M_k = cur.M;
    row.D_k = cur.spread();
    row.sigma_k = row.D_k > 0.0 ? std::min(params.tau, row.D_k / (2.0 * cur.M)) : 0.0;
    row.gamma_k = cert.gamma_at(row.D_k, cur.M);
    row.gamma_tilde = cert.gamma_tilde(row.D_k);
    row.bound_rhs = (1.0 - row.gamma_tilde) * row.D_k;
    row.m_next = next.m;
    row.M_next = next.M;
    row.D_next = next.spread();
    const double margin = 0.5 * row.gamma_tilde * row.D_k;
    row.claim_pass = next.m >= row.m_k + margin - rep.tolerance &&
                     next.M <= row.M_k - margin + rep.tolerance;
    row.shrink_pass = row.D_next <= row.bound_rhs + rep.tolerance;
    row.pass = row.claim_pass && row.shrink_pass;
    rep.rows.push_back(row);
  }
  return rep;
}

double projected_distance_bound(double M, std::span<const double> coordinate_spreads) {
  double s2 = 0.0;
  for (double s : coordinate_spreads) s2 += s * s;
  return std::max(2.0 * M, std::sqrt(s2));
}

ContractionReport contraction_report(const Trajectory& traj, std::span<const double> direction,
                                     const ModelParams& params,
                                     std::optional<double> distance_bound) {
  if (traj.empty() || traj.node_index(0) != 0)
    throw DomainError("trajectory must start at t = -tau");
  auto mon = monitor_of(traj, direction);
  if (!mon.has_initial()) throw DomainError("trajectory does not cover the initial window");
  if (!(mon.initial().m > 0.0))
    throw PreconditionError("projection minimum must be positive; apply translate_positive first");
  if (mon.intervals().size() < 2 && !traj.summary.consensus)
    throw DomainError("insufficient time range: the trajectory must reach t = 6 tau");

  if (!distance_bound && traj.dim() > 1) {
    std::vector<double> spreads;
    for (const auto& e : basis_directions(traj.dim()))
      spreads.push_back(extrema(traj, traj.start_time(), 0.0, e).spread());
    distance_bound = projected_distance_bound(mon.initial().M, spreads);
  }
  return contraction_report(mon.intervals(), params, distance_bound);
}

SpeedCheck speed_check(const Trajectory& traj, std::span<const double> direction) {
  auto mon = monitor_of(traj, direction);
  SpeedCheck s;
  s.max_speed = mon.max_speed();
  s.bound = mon.initial().M;
  s.pass = s.max_speed <= s.bound + 1e-9;
  return s;
}

StayCheck stay_check(const Extrema& initial, const Extrema& forward) {
  StayCheck s;
  s.initial = initial;
  s.forward = forward;
  s.tolerance = 1e-9 * (initial.spread() + 1.0);
  s.pass = forward.m >= initial.m - s.tolerance && forward.M <= initial.M + s.tolerance;
  return s;
}

StayCheck stay_check(const Trajectory& traj, std::span<const double> direction) {
  auto mon = monitor_of(traj, direction);
  if (traj.end_time() < 0.0) return stay_check(mon.initial(), mon.initial());
  return stay_check(mon.initial(), mon.forward_envelope());
}

bool projection_reduction_holds(const Positions& p, double tol) {
  double worst = 0.0;
  for (std::size_t c = 0; c < p.dim(); ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < p.size(); ++i) {
      lo = std::min(lo, p(i, c));
      hi = std::max(hi, p(i, c));
    }
    worst = std::max(worst, hi - lo);
  }
  return diameter(p) <= std::sqrt(static_cast<double>(p.dim())) * worst + tol;
}

std::vector<std::vector<double>> basis_directions(std::size_t dim) {
  std::vector<std::vector<double>> out(dim, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < dim; ++c) out[c][c] = 1.0;
  return out;
}

}  // namespace hkdelay

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hkdelay/model.hpp"

namespace hkdelay {

/// Grid index of a node. Node j sits at time (j - K) * h with h = tau / K,
/// so index 0 is t = -tau and index K is t = 0 exactly.
using NodeIndex = std::int64_t;

/// Sliding record of (position, velocity) pairs on the uniform grid, covering
/// at least the last delay window [t - tau, t].
///
/// The solution generally has a derivative jump at t = 0: the left derivative
/// comes from the prescribed history, the right one from the dynamics. The
/// node at t = 0 keeps both; every other node has a single velocity.
class HistoryBuffer {
 public:
  HistoryBuffer(std::size_t n, std::size_t dim, double tau, int steps_per_delay);

  std::size_t agents() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  int steps_per_delay() const noexcept { return k_; }
  double step() const noexcept { return h_; }
  double tau() const noexcept { return tau_; }
  double time_of(NodeIndex j) const noexcept { return static_cast<double>(j - k_) * h_; }

  NodeIndex first_index() const noexcept { return first_; }
  NodeIndex last_index() const noexcept { return first_ + static_cast<NodeIndex>(count_) - 1; }
  double window_start() const noexcept { return time_of(first_); }
  bool empty() const noexcept { return count_ == 0; }

  /// Appends node last_index() + 1, evicting the oldest node when the window
  /// exceeds K + 2 nodes.
  void push(std::span<const double> x, std::span<const double> v);

  std::span<const double> position(NodeIndex j) const;
  /// Velocity used on the interval to the right of node j (right derivative
  /// at t = 0).
  std::span<const double> velocity(NodeIndex j) const;
  /// Velocity used on the interval to the left of node j.
  std::span<const double> velocity_left(NodeIndex j) const;

  void set_origin_left_velocity(std::span<const double> v);

  /// Hermite interpolant on [node j, node j+1] at fraction theta in [0, 1].
  void interpolate(NodeIndex j, double theta, std::span<double> out) const;

  /// Positions at any time inside the stored window.
  Positions query(double t) const;

 private:
  std::size_t slot(NodeIndex j) const;

  std::size_t n_;
  std::size_t dim_;
  double tau_;
  int k_;
  double h_;
  std::size_t capacity_;
  NodeIndex first_ = 0;
  std::size_t count_ = 0;
  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<double> origin_left_v_;
};

}  // namespace hkdelay

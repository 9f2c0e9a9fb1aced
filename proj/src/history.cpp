#include "hkdelay/history.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hkdelay/errors.hpp"
#include "hkdelay/geometry.hpp"

namespace hkdelay {

HistoryBuffer::HistoryBuffer(std::size_t n, std::size_t dim, double tau, int steps_per_delay)
    : n_(n),
      dim_(dim),
      tau_(tau),
      k_(steps_per_delay),
      h_(tau / steps_per_delay),
      capacity_(static_cast<std::size_t>(steps_per_delay) + 2),
      x_(capacity_ * n * dim),
      v_(capacity_ * n * dim) {
  if (steps_per_delay < 4) throw ConfigError("integrator.steps_per_delay must be >= 4");
  if (!(tau > 0.0)) throw ConfigError("model.tau must be > 0");
}

std::size_t HistoryBuffer::slot(NodeIndex j) const {
  if (count_ == 0 || j < first_ || j > last_index())
    throw DomainError("history node " + std::to_string(j) + " outside stored window");
  return static_cast<std::size_t>(j % static_cast<NodeIndex>(capacity_));
}

void HistoryBuffer::push(std::span<const double> x, std::span<const double> v) {
  const std::size_t w = n_ * dim_;
  if (x.size() != w || v.size() != w) throw DomainError("history sample has wrong size");
  const NodeIndex j = count_ == 0 ? first_ : last_index() + 1;
  if (count_ == capacity_) {
    ++first_;
  } else {
    ++count_;
  }
  const std::size_t s = static_cast<std::size_t>(j % static_cast<NodeIndex>(capacity_));
  std::copy(x.begin(), x.end(), x_.begin() + static_cast<std::ptrdiff_t>(s * w));
  std::copy(v.begin(), v.end(), v_.begin() + static_cast<std::ptrdiff_t>(s * w));
}

std::span<const double> HistoryBuffer::position(NodeIndex j) const {
  const std::size_t w = n_ * dim_;
  return {x_.data() + slot(j) * w, w};
}

std::span<const double> HistoryBuffer::velocity(NodeIndex j) const {
  const std::size_t w = n_ * dim_;
  return {v_.data() + slot(j) * w, w};
}

std::span<const double> HistoryBuffer::velocity_left(NodeIndex j) const {
  if (j == k_ && !origin_left_v_.empty()) {
    slot(j);
    return origin_left_v_;
  }
  return velocity(j);
}

void HistoryBuffer::set_origin_left_velocity(std::span<const double> v) {
  origin_left_v_.assign(v.begin(), v.end());
}

void HistoryBuffer::interpolate(NodeIndex j, double theta, std::span<double> out) const {
  if (theta == 0.0) {
    auto p = position(j);
    std::copy(p.begin(), p.end(), out.begin());
    return;
  }
  hermite(position(j), velocity(j), position(j + 1), velocity_left(j + 1), h_, theta, out);
}

Positions HistoryBuffer::query(double t) const {
  const double t0 = window_start();
  const double t1 = time_of(last_index());
  if (!(t >= t0 && t <= t1))
    throw DomainError("query time " + std::to_string(t) + " outside history window");
  Positions out(n_, dim_);
  const double u = (t - t0) / h_;
  NodeIndex j = first_ + static_cast<NodeIndex>(std::floor(u));
  j = std::min(j, last_index());
  if (j == last_index()) {
    auto p = position(j);
    std::copy(p.begin(), p.end(), out.flat().begin());
    return out;
  }
  const double theta = std::clamp((t - time_of(j)) / h_, 0.0, 1.0);
  interpolate(j, theta, out.flat());
  return out;
}

}  // namespace hkdelay

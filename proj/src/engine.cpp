#include "hkdelay/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hkdelay/errors.hpp"
#include "hkdelay/geometry.hpp"
#include "hkdelay/rng.hpp"

namespace hkdelay {

// ---------------------------------------------------------------------------
// InitialHistory

InitialHistory InitialHistory::constant_per_agent(Positions positions) {
  InitialHistory h;
  h.kind_ = Kind::ConstantPerAgent;
  h.samples_.push_back(std::move(positions));
  return h;
}

InitialHistory InitialHistory::function_sampled(std::vector<Positions> samples) {
  if (samples.empty()) throw ConfigError("history.samples must not be empty");
  InitialHistory h;
  h.kind_ = Kind::FunctionSampled;
  h.samples_ = std::move(samples);
  return h;
}

InitialHistory InitialHistory::random_constant(std::uint64_t seed, double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw ConfigError("history.box must satisfy lo <= hi, both finite");
  InitialHistory h;
  h.kind_ = Kind::RandomConstant;
  h.seed_ = seed;
  h.lo_ = lo;
  h.hi_ = hi;
  return h;
}

InitialHistory InitialHistory::sample(
    const std::function<std::vector<double>(std::size_t, double)>& f, std::size_t n,
    std::size_t dim, double tau, int steps_per_delay) {
  const double h = tau / steps_per_delay;
  std::vector<Positions> samples;
  samples.reserve(static_cast<std::size_t>(steps_per_delay) + 1);
  for (int j = 0; j <= steps_per_delay; ++j) {
    const double t = static_cast<double>(j - steps_per_delay) * h;
    Positions p(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = f(i, t);
      if (v.size() != dim) throw ConfigError("history function returned wrong dimension");
      std::copy(v.begin(), v.end(), p.agent(i).begin());
    }
    samples.push_back(std::move(p));
  }
  return function_sampled(std::move(samples));
}

std::vector<Positions> InitialHistory::materialize(const ModelParams& params,
                                                   int steps_per_delay) const {
  const auto nodes = static_cast<std::size_t>(steps_per_delay) + 1;
  auto check_shape = [&](const Positions& p) {
    if (p.size() != params.n_agents || p.dim() != params.dim)
      throw ConfigError("history positions must be " + std::to_string(params.n_agents) + " x " +
                        std::to_string(params.dim));
    for (double v : p.flat())
      if (!std::isfinite(v)) throw ConfigError("history contains a non-finite sample");
  };
  switch (kind_) {
    case Kind::ConstantPerAgent:
      check_shape(samples_.front());
      return std::vector<Positions>(nodes, samples_.front());
    case Kind::FunctionSampled:
      if (samples_.size() != nodes)
        throw ConfigError("history.samples must hold K + 1 = " + std::to_string(nodes) +
                          " grid samples (got " + std::to_string(samples_.size()) + ")");
      for (const auto& p : samples_) check_shape(p);
      return samples_;
    case Kind::RandomConstant: {
      Rng rng(seed_);
      Positions p(params.n_agents, params.dim);
      for (std::size_t i = 0; i < params.n_agents; ++i)
        for (std::size_t c = 0; c < params.dim; ++c) p(i, c) = rng.uniform(lo_, hi_);
      return std::vector<Positions>(nodes, p);
    }
  }
  return {};
}

void IntegratorConfig::validate() const {
  if (steps_per_delay < 4) throw ConfigError("integrator.steps_per_delay must be >= 4");
  if (!std::isfinite(t_end) || t_end < 0.0) throw ConfigError("integrator.t_end must be >= 0");
  if (record_stride < 1) throw ConfigError("integrator.record_stride must be >= 1");
  if (!std::isfinite(eps_consensus) || eps_consensus < 0.0)
    throw ConfigError("analysis.eps_consensus must be >= 0");
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(ModelParams params, const InitialHistory& history, IntegratorConfig cfg)
    : params_(std::move(params)),
      cfg_(cfg),
      buffer_((params_.validate(), cfg_.validate(), params_.n_agents), params_.dim, params_.tau,
              cfg_.steps_per_delay) {
  const std::size_t w = params_.n_agents * params_.dim;
  for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &d_half_, &x_new_}) v->assign(w, 0.0);
  row_sums_.assign(params_.n_agents, 0.0);

  const int k = cfg_.steps_per_delay;
  const double h = buffer_.step();
  const auto samples = history.materialize(params_, k);

  // Central differences inside the window, one-sided at its ends.
  auto fd_velocity = [&](int j, std::span<double> out) {
    const int lo = std::max(j - 1, 0);
    const int hi = std::min(j + 1, k);
    const double span = static_cast<double>(hi - lo) * h;
    auto a = samples[static_cast<std::size_t>(lo)].flat();
    auto b = samples[static_cast<std::size_t>(hi)].flat();
    for (std::size_t q = 0; q < w; ++q) out[q] = (b[q] - a[q]) / span;
  };

  std::vector<double> v(w);
  for (int j = 0; j < k; ++j) {
    fd_velocity(j, v);
    buffer_.push(samples[static_cast<std::size_t>(j)].flat(), v);
  }
  fd_velocity(k, v);
  buffer_.set_origin_left_velocity(v);
  std::vector<double> right(w);
  eval(samples.back().flat(), samples.front().flat(), right);
  buffer_.push(samples.back().flat(), right);
  node_ = k;

  for (NodeIndex j = buffer_.first_index(); j <= node_; ++j) track_diameter(buffer_.position(j));
}

void Simulation::eval(std::span<const double> x, std::span<const double> delayed,
                      std::span<double> out) {
  rhs_into(params_, x, delayed, out, row_sums_);
  for (double s : row_sums_) {
    if (diag_.evaluations == 0) {
      diag_.max_row_sum = diag_.min_row_sum = s;
    } else {
      diag_.max_row_sum = std::max(diag_.max_row_sum, s);
      diag_.min_row_sum = std::min(diag_.min_row_sum, s);
    }
    diag_.max_deviation_from_one = std::max(diag_.max_deviation_from_one, std::abs(s - 1.0));
  }
  ++diag_.evaluations;
}

void Simulation::track_diameter(std::span<const double> x) {
  // Called once per node in increasing order; the node being tracked is the
  // one whose index equals the number of previous calls.
  const NodeIndex j = tracked_;
  ++tracked_;
  diam_ = diameter(x, params_.n_agents, params_.dim);
  if (diam_ >= cfg_.eps_consensus) last_wide_node_ = j;
  if (!consensus_time_ && j - last_wide_node_ > cfg_.steps_per_delay)
    consensus_time_ = buffer_.time_of(j);
}

bool Simulation::consensus_reached() const noexcept {
  return node_ - last_wide_node_ > cfg_.steps_per_delay;
}

void Simulation::emit_window(const NodeObserver& obs) const {
  if (!obs) return;
  for (NodeIndex j = buffer_.first_index(); j <= buffer_.last_index(); ++j) {
    auto x = buffer_.position(j);
    obs(NodeView{j, buffer_.time_of(j), x, buffer_.velocity(j),
                 diameter(x, params_.n_agents, params_.dim)});
  }
}

void Simulation::step() {
  const NodeIndex j = node_;
  const NodeIndex lag = j - cfg_.steps_per_delay;
  const double h = buffer_.step();
  const std::size_t w = tmp_.size();
  const auto x = buffer_.position(j);
  const auto v = buffer_.velocity(j);
  std::copy(v.begin(), v.end(), k1_.begin());

  buffer_.interpolate(lag, 0.5, d_half_);
  for (std::size_t q = 0; q < w; ++q) tmp_[q] = x[q] + 0.5 * h * k1_[q];
  eval(tmp_, d_half_, k2_);
  for (std::size_t q = 0; q < w; ++q) tmp_[q] = x[q] + 0.5 * h * k2_[q];
  eval(tmp_, d_half_, k3_);
  const auto d_next = buffer_.position(lag + 1);
  for (std::size_t q = 0; q < w; ++q) tmp_[q] = x[q] + h * k3_[q];
  eval(tmp_, d_next, k4_);

  const double h6 = h / 6.0;
  for (std::size_t q = 0; q < w; ++q)
    x_new_[q] = x[q] + h6 * (k1_[q] + 2.0 * k2_[q] + 2.0 * k3_[q] + k4_[q]);
  for (double value : x_new_)
    if (!std::isfinite(value))
      throw IntegrationFailure("non-finite state", buffer_.time_of(j + 1));

  // Velocity at the new node doubles as k1 of the next step.
  eval(x_new_, d_next, tmp_);
  buffer_.push(x_new_, tmp_);
  node_ = j + 1;
  track_diameter(buffer_.position(node_));
}

RunSummary Simulation::advance(double t_end, const NodeObserver& obs) {
  if (!std::isfinite(t_end)) throw DomainError("t_end must be finite");
  if (t_end < time()) throw DomainError("t_end precedes the current time");
  const double q = t_end / buffer_.step();
  const double rq = std::round(q);
  const double n = std::abs(q - rq) <= 1e-9 * std::max(1.0, std::abs(q)) ? rq : std::ceil(q);
  const NodeIndex target = static_cast<NodeIndex>(n) + cfg_.steps_per_delay;

  while (node_ < target) {
    if (cfg_.stop_at_consensus && consensus_reached()) break;
    step();
    if (obs) obs(NodeView{node_, time(), positions(), velocity(), diam_});
  }
  RunSummary s;
  s.end_time = time();
  s.consensus = consensus_reached();
  s.consensus_time = consensus_time_.value_or(0.0);
  s.final_diameter = diam_;
  return s;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::size_t n, std::size_t dim, double tau, int steps_per_delay, int stride)
    : n_(n), dim_(dim), tau_(tau), k_(steps_per_delay), stride_(stride),
      h_(tau / steps_per_delay) {
  if (stride < 1) throw ConfigError("integrator.record_stride must be >= 1");
}

std::span<const double> Trajectory::position(std::size_t r) const {
  if (r >= size()) throw DomainError("trajectory record out of range");
  return {x_.data() + r * n_ * dim_, n_ * dim_};
}

std::span<const double> Trajectory::velocity(std::size_t r) const {
  if (r >= size()) throw DomainError("trajectory record out of range");
  return {v_.data() + r * n_ * dim_, n_ * dim_};
}

Positions Trajectory::positions_at(std::size_t r) const {
  auto p = position(r);
  return Positions(n_, dim_, std::vector<double>(p.begin(), p.end()));
}

void Trajectory::record(const NodeView& node) {
  if (node.index % stride_ != 0) return;
  if (!index_.empty() && node.index <= index_.back())
    throw DomainError("trajectory nodes must arrive in increasing order");
  index_.push_back(node.index);
  x_.insert(x_.end(), node.position.begin(), node.position.end());
  v_.insert(v_.end(), node.velocity.begin(), node.velocity.end());
}

Positions Trajectory::query(double t) const {
  if (empty() || !(t >= start_time() && t <= end_time()))
    throw DomainError("query time " + std::to_string(t) + " outside recorded range");
  Positions out(n_, dim_);
  // Records are uniform in index, so the bracket is found arithmetically.
  const double spacing = h_ * stride_;
  auto r = static_cast<std::size_t>(std::floor((t - start_time()) / spacing));
  r = std::min(r, size() - 1);
  while (r > 0 && time(r) > t) --r;
  while (r + 1 < size() && time(r + 1) <= t) ++r;
  if (r + 1 == size() || time(r) == t) {
    auto p = position(r);
    std::copy(p.begin(), p.end(), out.flat().begin());
    return out;
  }
  const double dt = time(r + 1) - time(r);
  auto v1 = (index_[r + 1] == k_ && !origin_left_v_.empty())
                ? std::span<const double>(origin_left_v_)
                : velocity(r + 1);
  hermite(position(r), velocity(r), position(r + 1), v1, dt, (t - time(r)) / dt, out.flat());
  return out;
}

std::vector<double> Trajectory::query(std::size_t agent, double t) const {
  if (agent >= n_) throw DomainError("agent index out of range");
  auto p = query(t);
  auto a = p.agent(agent);
  return {a.begin(), a.end()};
}

Trajectory Trajectory::shifted(std::span<const double> shift) const {
  if (shift.size() != dim_) throw DomainError("shift vector has wrong dimension");
  Trajectory out = *this;
  for (std::size_t q = 0; q < out.x_.size(); ++q) out.x_[q] += shift[q % dim_];
  return out;
}

bool Trajectory::operator==(const Trajectory& o) const {
  return n_ == o.n_ && dim_ == o.dim_ && tau_ == o.tau_ && k_ == o.k_ && stride_ == o.stride_ &&
         index_ == o.index_ && x_ == o.x_ && v_ == o.v_ && origin_left_v_ == o.origin_left_v_;
}

Trajectory run_until(Simulation& sim, double t_end) {
  const auto& buf = sim.history();
  Trajectory traj(sim.params().n_agents, sim.params().dim, sim.params().tau,
                  sim.config().steps_per_delay, sim.config().record_stride);
  if (buf.first_index() <= buf.steps_per_delay() && buf.last_index() >= buf.steps_per_delay())
    traj.set_origin_left_velocity(buf.velocity_left(buf.steps_per_delay()));
  const NodeObserver rec = [&traj](const NodeView& v) { traj.record(v); };
  sim.emit_window(rec);
  traj.summary = sim.advance(t_end, rec);
  return traj;
}

}  // namespace hkdelay

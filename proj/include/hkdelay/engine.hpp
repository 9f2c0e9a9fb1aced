#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hkdelay/history.hpp"
#include "hkdelay/model.hpp"

namespace hkdelay {

/// Prescribed trajectories on [-tau, 0].
class InitialHistory {
 public:
  enum class Kind { ConstantPerAgent, FunctionSampled, RandomConstant };

  static InitialHistory constant_per_agent(Positions positions);
  /// One Positions per grid node of [-tau, 0], i.e. K + 1 samples, oldest first.
  static InitialHistory function_sampled(std::vector<Positions> samples);
  /// Each coordinate of each agent drawn i.i.d. uniform on [lo, hi] (agent
  /// by agent, coordinate by coordinate) and held constant in time.
  static InitialHistory random_constant(std::uint64_t seed, double lo, double hi);

  /// Samples a callable f(agent, t) -> R^d on the K + 1 grid nodes of [-tau, 0].
  static InitialHistory sample(const std::function<std::vector<double>(std::size_t, double)>& f,
                               std::size_t n, std::size_t dim, double tau, int steps_per_delay);

  Kind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double box_lo() const noexcept { return lo_; }
  double box_hi() const noexcept { return hi_; }
  const std::vector<Positions>& samples() const noexcept { return samples_; }

  /// Grid samples of the history for the given model and resolution.
  std::vector<Positions> materialize(const ModelParams& params, int steps_per_delay) const;

 private:
  Kind kind_ = Kind::ConstantPerAgent;
  std::uint64_t seed_ = 0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<Positions> samples_;
};

struct IntegratorConfig {
  int steps_per_delay = 64;
  double t_end = 0.0;
  int record_stride = 1;
  double eps_consensus = 1e-8;
  /// Stop once every node of the last delay window has diameter < eps_consensus.
  bool stop_at_consensus = true;

  void validate() const;
};

/// Extremes of sum_{j != i} psi_ij seen over every right-hand-side evaluation.
struct WeightDiagnostics {
  double max_row_sum = 0.0;
  double min_row_sum = 0.0;
  double max_deviation_from_one = 0.0;
  std::int64_t evaluations = 0;
};

/// One grid node as seen by an observer. For t >= 0 `velocity` is the
/// solution's derivative from the right; on (-tau, 0) it is the history's.
struct NodeView {
  NodeIndex index;
  double time;
  std::span<const double> position;
  std::span<const double> velocity;
  double diameter;
};

using NodeObserver = std::function<void(const NodeView&)>;

struct RunSummary {
  double end_time = 0.0;
  bool consensus = false;
  double consensus_time = 0.0;  // first time the last-window criterion held
  double final_diameter = 0.0;
};

/// Method-of-steps RK4 integrator for the delayed system.
///
/// Stage values at t + h/2 - tau come from the Hermite interpolant of the
/// history; stages at t - tau and t + h - tau sit on grid nodes. Since
/// h = tau / K, derivative breaking points at multiples of tau are nodes.
class Simulation {
 public:
  Simulation(ModelParams params, const InitialHistory& history, IntegratorConfig cfg);

  const ModelParams& params() const noexcept { return params_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }
  const HistoryBuffer& history() const noexcept { return buffer_; }
  const WeightDiagnostics& diagnostics() const noexcept { return diag_; }

  double time() const noexcept { return buffer_.time_of(node_); }
  NodeIndex node_index() const noexcept { return node_; }
  double step_size() const noexcept { return buffer_.step(); }
  std::span<const double> positions() const { return buffer_.position(node_); }
  /// Right derivative at the current node.
  std::span<const double> velocity() const { return buffer_.velocity(node_); }
  double current_diameter() const noexcept { return diam_; }
  bool consensus_reached() const noexcept;

  /// Calls `obs` for every node currently stored (the initial window right
  /// after construction).
  void emit_window(const NodeObserver& obs) const;

  /// Advances by one step h. Throws IntegrationFailure on non-finite state.
  void step();

  /// Steps until t_end (rounded up to the next node) or consensus, calling
  /// `obs` on every new node.
  RunSummary advance(double t_end, const NodeObserver& obs = {});

 private:
  void eval(std::span<const double> x, std::span<const double> delayed, std::span<double> out);
  void track_diameter(std::span<const double> x);

  ModelParams params_;
  IntegratorConfig cfg_;
  HistoryBuffer buffer_;
  NodeIndex node_ = 0;
  double diam_ = 0.0;
  NodeIndex last_wide_node_ = -1;  // last node with diameter >= eps_consensus
  NodeIndex tracked_ = 0;
  std::optional<double> consensus_time_;
  WeightDiagnostics diag_;

  // scratch
  std::vector<double> k1_, k2_, k3_, k4_, tmp_, d_half_, row_sums_, x_new_;
};

/// Dense record of a run at record_stride granularity.
class Trajectory {
 public:
  Trajectory(std::size_t n, std::size_t dim, double tau, int steps_per_delay, int stride);

  std::size_t agents() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  double tau() const noexcept { return tau_; }
  int steps_per_delay() const noexcept { return k_; }
  int stride() const noexcept { return stride_; }
  double grid_step() const noexcept { return h_; }
  std::size_t size() const noexcept { return index_.size(); }
  bool empty() const noexcept { return index_.empty(); }

  NodeIndex node_index(std::size_t r) const { return index_.at(r); }
  double time(std::size_t r) const { return static_cast<double>(index_.at(r) - k_) * h_; }
  double start_time() const { return time(0); }
  double end_time() const { return time(size() - 1); }
  std::span<const double> position(std::size_t r) const;
  std::span<const double> velocity(std::size_t r) const;
  Positions positions_at(std::size_t r) const;

  /// Record node j if it falls on the stride. Nodes must arrive in order.
  void record(const NodeView& node);
  void set_origin_left_velocity(std::span<const double> v) {
    origin_left_v_.assign(v.begin(), v.end());
  }

  /// Hermite interpolation between recorded nodes.
  Positions query(double t) const;
  std::vector<double> query(std::size_t agent, double t) const;

  /// Copy with every position shifted by `shift` (length d).
  Trajectory shifted(std::span<const double> shift) const;

  RunSummary summary;

  bool operator==(const Trajectory& o) const;

 private:
  std::size_t n_, dim_;
  double tau_;
  int k_;
  int stride_;
  double h_;
  std::vector<NodeIndex> index_;
  std::vector<double> x_, v_;
  std::vector<double> origin_left_v_;
};

/// Records the stored window and every subsequent node up to t_end.
Trajectory run_until(Simulation& sim, double t_end);

}  // namespace hkdelay

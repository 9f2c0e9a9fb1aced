#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "hkdelay/influence.hpp"

namespace hkdelay {

enum class WeightScheme {
  Classical,           // psi(|x_j(t-tau) - x_i(t)|) / (N-1)
  NormalizedWithSelf,  // normalized over l = 1..N, self term from the history
  NormalizedNoSelf,    // normalized over l != i; rows sum to exactly one
};

std::string_view to_string(WeightScheme s) noexcept;
WeightScheme parse_scheme(std::string_view name);

struct ModelParams {
  std::size_t n_agents = 2;
  std::size_t dim = 1;
  double tau = 1.0;
  InfluenceFunction influence = InfluenceFunction::constant(1.0);
  WeightScheme scheme = WeightScheme::Classical;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// N agent positions in R^d, stored agent-major.
class Positions {
 public:
  Positions() = default;
  Positions(std::size_t n, std::size_t dim) : n_(n), dim_(dim), data_(n * dim, 0.0) {}
  Positions(std::size_t n, std::size_t dim, std::vector<double> flat);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<double> agent(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> agent(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  double& operator()(std::size_t i, std::size_t c) noexcept { return data_[i * dim_ + c]; }
  double operator()(std::size_t i, std::size_t c) const noexcept { return data_[i * dim_ + c]; }
  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  bool operator==(const Positions&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct SystemState {
  double time = 0.0;
  Positions positions;
};

/// Dense N x N matrix of communication weights psi_ij, row-major, zero
/// diagonal. `delayed` holds the positions at t - tau.
std::vector<double> weight_matrix(const ModelParams& params, const Positions& current,
                                  const Positions& delayed);

/// Velocities of the delayed system: v_i = sum_{j != i} psi_ij (x_j(t-tau) - x_i(t)).
Positions rhs(const ModelParams& params, const Positions& current, const Positions& delayed);

/// Allocation-free kernel behind rhs(). All spans are agent-major N*d.
/// When `row_sums` is non-empty it receives sum_{j != i} psi_ij per agent.
void rhs_into(const ModelParams& params, std::span<const double> current,
              std::span<const double> delayed, std::span<double> velocity,
              std::span<double> row_sums = {}) noexcept;

}  // namespace hkdelay

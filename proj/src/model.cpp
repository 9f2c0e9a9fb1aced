#include "hkdelay/model.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "hkdelay/errors.hpp"

namespace hkdelay {

std::string_view to_string(WeightScheme s) noexcept {
  switch (s) {
    case WeightScheme::Classical:
      return "classical";
    case WeightScheme::NormalizedWithSelf:
      return "normalized_with_self";
    case WeightScheme::NormalizedNoSelf:
      return "normalized_no_self";
  }
  return "classical";
}

WeightScheme parse_scheme(std::string_view name) {
  if (name == "classical") return WeightScheme::Classical;
  if (name == "normalized_with_self") return WeightScheme::NormalizedWithSelf;
  if (name == "normalized_no_self") return WeightScheme::NormalizedNoSelf;
  throw ConfigError("model.scheme must be one of classical, normalized_with_self, "
                    "normalized_no_self (got '" + std::string(name) + "')");
}

void ModelParams::validate() const {
  if (n_agents < 2) throw ConfigError("model.n_agents must be >= 2");
  if (dim < 1) throw ConfigError("model.dim must be >= 1");
  if (!std::isfinite(tau) || tau <= 0.0) throw ConfigError("model.tau must be > 0");
}

Positions::Positions(std::size_t n, std::size_t dim, std::vector<double> flat)
    : n_(n), dim_(dim), data_(std::move(flat)) {
  if (data_.size() != n * dim) throw DomainError("position buffer size does not match N*d");
}

namespace {

void check_shapes(const ModelParams& p, const Positions& a, const Positions& b) {
  if (a.size() != p.n_agents || b.size() != p.n_agents || a.dim() != p.dim || b.dim() != p.dim)
    throw DomainError("positions do not match the model's N and d");
  for (double v : a.flat())
    if (!std::isfinite(v)) throw DomainError("non-finite current position");
  for (double v : b.flat())
    if (!std::isfinite(v)) throw DomainError("non-finite delayed position");
}

inline double squared_distance(const double* a, const double* b, std::size_t d) noexcept {
  double s2 = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    s2 += diff * diff;
  }
  return s2;
}

}  // namespace

std::vector<double> weight_matrix(const ModelParams& params, const Positions& current,
                                  const Positions& delayed) {
  check_shapes(params, current, delayed);
  const std::size_t n = params.n_agents;
  const std::size_t d = params.dim;
  const auto& psi = params.influence;
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = current.agent(i).data();
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      w[i * n + j] = psi.from_squared(squared_distance(delayed.agent(j).data(), xi, d));
      norm += w[i * n + j];
    }
    switch (params.scheme) {
      case WeightScheme::Classical:
        norm = static_cast<double>(n - 1);
        break;
      case WeightScheme::NormalizedWithSelf:
        norm += psi.from_squared(squared_distance(delayed.agent(i).data(), xi, d));
        break;
      case WeightScheme::NormalizedNoSelf:
        break;
    }
    assert(norm > 0.0);
    for (std::size_t j = 0; j < n; ++j) w[i * n + j] /= norm;
  }
  return w;
}

Positions rhs(const ModelParams& params, const Positions& current, const Positions& delayed) {
  check_shapes(params, current, delayed);
  Positions v(params.n_agents, params.dim);
  rhs_into(params, current.flat(), delayed.flat(), v.flat());
  return v;
}

void rhs_into(const ModelParams& params, std::span<const double> current,
              std::span<const double> delayed, std::span<double> velocity,
              std::span<double> row_sums) noexcept {
  const std::size_t n = params.n_agents;
  const std::size_t d = params.dim;
  const auto& psi = params.influence;
  const double* x = current.data();
  const double* y = delayed.data();
  const bool want_sums = !row_sums.empty();

  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * d;
    double* vi = velocity.data() + i * d;
    for (std::size_t c = 0; c < d; ++c) vi[c] = 0.0;
    double raw_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double* yj = y + j * d;
      const double w = psi.from_squared(squared_distance(yj, xi, d));
      raw_sum += w;
      for (std::size_t c = 0; c < d; ++c) vi[c] += w * (yj[c] - xi[c]);
    }
    double norm = 1.0;
    switch (params.scheme) {
      case WeightScheme::Classical:
        norm = static_cast<double>(n - 1);
        break;
      case WeightScheme::NormalizedWithSelf:
        norm = raw_sum + psi.from_squared(squared_distance(y + i * d, xi, d));
        break;
      case WeightScheme::NormalizedNoSelf:
        norm = raw_sum;
        break;
    }
    // psi > 0 everywhere, so norm >= (N-1) * min psi > 0.
    assert(norm > 0.0);
    const double inv = 1.0 / norm;
    for (std::size_t c = 0; c < d; ++c) vi[c] *= inv;
    if (want_sums) row_sums[i] = raw_sum * inv;
  }
}

}  // namespace hkdelay

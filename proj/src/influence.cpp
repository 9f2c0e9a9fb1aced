#include "hkdelay/influence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hkdelay/errors.hpp"

namespace hkdelay {

namespace {

double int_pow_inverse(double base, int n) noexcept {
  double r = 1.0;
  for (int k = 0; k < n; ++k) r *= base;
  return 1.0 / r;
}

}  // namespace

InfluenceFunction InfluenceFunction::power_law(double beta, std::optional<double> declared_sup) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw ConfigError("influence.beta must be a finite nonnegative number");
  InfluenceFunction f;
  f.family_ = Family::PowerLaw;
  f.beta_ = beta;
  if (beta <= 16.0 && beta == std::floor(beta)) f.integer_beta_ = static_cast<int>(beta);
  f.validate_declared(declared_sup);
  return f;
}

InfluenceFunction InfluenceFunction::constant(double level, std::optional<double> declared_sup) {
  if (!std::isfinite(level) || level <= 0.0 || level > 1.0)
    throw ConfigError("influence.level must lie in (0, 1]");
  InfluenceFunction f;
  f.family_ = Family::Constant;
  f.level_ = level;
  f.validate_declared(declared_sup);
  return f;
}

InfluenceFunction InfluenceFunction::tabulated(std::vector<Knot> knots,
                                               std::optional<double> declared_sup) {
  if (knots.empty()) throw ConfigError("influence.knots must contain at least one knot");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const auto& kn = knots[k];
    if (!std::isfinite(kn.distance) || kn.distance < 0.0)
      throw ConfigError("influence.knots[" + std::to_string(k) + "] distance must be >= 0");
    if (!std::isfinite(kn.value) || kn.value <= 0.0 || kn.value > 1.0)
      throw ConfigError("influence.knots[" + std::to_string(k) + "] value must lie in (0, 1]");
    if (k > 0 && !(knots[k - 1].distance < kn.distance))
      throw ConfigError("influence.knots must be strictly increasing in distance");
  }
  InfluenceFunction f;
  f.family_ = Family::Tabulated;
  f.knots_ = std::move(knots);
  f.validate_declared(declared_sup);
  return f;
}

void InfluenceFunction::validate_declared(std::optional<double> declared) {
  const double sup = supremum();
  const double d = declared.value_or(sup);
  if (!std::isfinite(d) || d <= 0.0 || d > 1.0)
    throw ConfigError("influence.declared_sup must lie in (0, 1]; rescale time to enforce psi <= 1");
  if (sup > d)
    throw ConfigError("influence family exceeds influence.declared_sup");
  declared_sup_ = d;
}

double InfluenceFunction::supremum() const noexcept {
  switch (family_) {
    case Family::PowerLaw:
      return 1.0;
    case Family::Constant:
      return level_;
    case Family::Tabulated: {
      double m = 0.0;
      for (const auto& k : knots_) m = std::max(m, k.value);
      return m;
    }
  }
  return 1.0;
}

double InfluenceFunction::tabulated_at(double s) const noexcept {
  if (s <= knots_.front().distance) return knots_.front().value;
  if (s >= knots_.back().distance) return knots_.back().value;
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), s,
                             [](double v, const Knot& k) { return v < k.distance; });
  auto lo = hi - 1;
  const double w = (s - lo->distance) / (hi->distance - lo->distance);
  return lo->value + w * (hi->value - lo->value);
}

double InfluenceFunction::from_squared(double s2) const noexcept {
  switch (family_) {
    case Family::PowerLaw:
      if (integer_beta_ == 0) return 1.0;
      if (integer_beta_ > 0) return int_pow_inverse(1.0 + s2, integer_beta_);
      return std::pow(1.0 + s2, -beta_);
    case Family::Constant:
      return level_;
    case Family::Tabulated:
      return tabulated_at(std::sqrt(s2));
  }
  return level_;
}

double InfluenceFunction::operator()(double s) const {
  if (!std::isfinite(s) || s < 0.0)
    throw DomainError("influence argument must be finite and nonnegative");
  if (family_ == Family::Tabulated) return tabulated_at(s);
  return from_squared(s * s);
}

double InfluenceFunction::min_on(double s_max) const {
  if (!std::isfinite(s_max) || s_max < 0.0)
    throw DomainError("influence range bound must be finite and nonnegative");
  switch (family_) {
    case Family::PowerLaw:
      return (*this)(s_max);
    case Family::Constant:
      return level_;
    case Family::Tabulated: {
      double m = std::min(tabulated_at(0.0), tabulated_at(s_max));
      for (const auto& k : knots_)
        if (k.distance <= s_max) m = std::min(m, k.value);
      return m;
    }
  }
  return level_;
}

}  // namespace hkdelay

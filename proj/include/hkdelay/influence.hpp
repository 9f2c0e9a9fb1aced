#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace hkdelay {

struct Knot {
  double distance;
  double value;
};

/// Communication rate psi: [0, inf) -> (0, 1].
///
/// Three families are supported: the power law (1 + s^2)^(-beta), a
/// constant level, and a piecewise-linear table. Construction validates
/// global positivity and the unit bound; a value outside (0, 1] can never be
/// produced by a constructed instance.
class InfluenceFunction {
 public:
  enum class Family { PowerLaw, Constant, Tabulated };

  static InfluenceFunction power_law(double beta, std::optional<double> declared_sup = {});
  static InfluenceFunction constant(double level, std::optional<double> declared_sup = {});
  /// Knots must be sorted by distance, distances >= 0, values in (0, 1].
  /// Linear between knots, constant before the first and after the last knot.
  static InfluenceFunction tabulated(std::vector<Knot> knots,
                                     std::optional<double> declared_sup = {});

  /// psi(s). Throws DomainError for negative or non-finite s.
  double operator()(double s) const;

  /// psi evaluated from the squared distance. Unchecked hot path used by the
  /// right-hand side; avoids the square root for the power law.
  double from_squared(double s2) const noexcept;

  /// min of psi over [0, s_max]: exact for the power law (decreasing) and the
  /// constant; knots inside the range plus both endpoints for the table.
  double min_on(double s_max) const;

  /// Largest value attained on [0, inf).
  double supremum() const noexcept;

  Family family() const noexcept { return family_; }
  double beta() const noexcept { return beta_; }
  double level() const noexcept { return level_; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }
  double declared_sup() const noexcept { return declared_sup_; }

 private:
  InfluenceFunction() = default;
  void validate_declared(std::optional<double> declared);
  double tabulated_at(double s) const noexcept;

  Family family_ = Family::Constant;
  double beta_ = 0.0;
  int integer_beta_ = -1;  // >= 0 when beta is a small integer
  double level_ = 1.0;
  std::vector<Knot> knots_;
  double declared_sup_ = 1.0;
};

}  // namespace hkdelay

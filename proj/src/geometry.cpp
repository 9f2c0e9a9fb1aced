#include "hkdelay/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hkdelay/errors.hpp"

namespace hkdelay {

double diameter(std::span<const double> points, std::size_t n, std::size_t dim) {
  if (n == 0) throw DomainError("diameter of an empty point set");
  if (points.size() != n * dim) throw DomainError("point buffer size does not match N*d");
  const double* p = points.data();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double diff = p[i * dim + c] - p[j * dim + c];
        s2 += diff * diff;
      }
      best = std::max(best, s2);
    }
  }
  return std::sqrt(best);
}

void hermite(std::span<const double> x0, std::span<const double> v0, std::span<const double> x1,
             std::span<const double> v1, double dt, double theta, std::span<double> out) noexcept {
  if (theta == 0.0) {
    std::copy(x0.begin(), x0.end(), out.begin());
    return;
  }
  if (theta == 1.0) {
    std::copy(x1.begin(), x1.end(), out.begin());
    return;
  }
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = (t3 - 2.0 * t2 + theta) * dt;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = (t3 - t2) * dt;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = h00 * x0[k] + h10 * v0[k] + h01 * x1[k] + h11 * v1[k];
}

}  // namespace hkdelay

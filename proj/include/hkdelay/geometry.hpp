#pragma once

#include <cstddef>
#include <span>

namespace hkdelay {

/// Largest pairwise Euclidean distance of n agent-major points in R^d.
/// Exact O(n^2 d) scan; a single point has diameter 0.
double diameter(std::span<const double> points, std::size_t n, std::size_t dim);

/// Cubic Hermite interpolation on one interval of length dt at fraction
/// theta in [0, 1]. theta = 0 and theta = 1 return x0 and x1 exactly.
void hermite(std::span<const double> x0, std::span<const double> v0, std::span<const double> x1,
             std::span<const double> v1, double dt, double theta, std::span<double> out) noexcept;

}  // namespace hkdelay

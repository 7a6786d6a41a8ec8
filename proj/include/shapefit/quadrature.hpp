#pragma once

#include <functional>
#include <span>
#include <vector>

namespace shapefit {

/// Adaptive Gauss-Kronrod integral of f over [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12);

/// Composite 6-point Gauss-Legendre over consecutive panel breakpoints.
/// Exact for piecewise polynomials of degree <= 11 on the panels.
double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> breakpoints);

/// Sorted union of two breakpoint lists restricted to [lo, hi], with lo/hi included.
std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b,
                                      double lo, double hi);

}  // namespace shapefit

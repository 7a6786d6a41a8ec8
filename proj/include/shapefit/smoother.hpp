#pragma once

#include "shapefit/design.hpp"
#include "shapefit/kernels.hpp"

#include <cstdint>
#include <vector>

namespace shapefit {

struct DerivativeCurve {
    std::vector<double> grid;
    std::vector<double> values;
    int ell = 0;
    double halfwidth = 0.0;
    std::vector<std::uint8_t> boundary_flag;  // nonempty only with allow_boundary

    /// Piecewise-linear interpolation of the curve.
    double interpolate(double t) const;
};

struct GmOptions {
    bool allow_boundary = false;
};

/// Kernel estimate of f^(ell) at the grid points: a gap-weighted sum of the
/// observations with halfwidth h. Grid points whose window [t-h, t+h] leaves
/// [0, 1] raise an error unless allow_boundary is set (then they are flagged).
DerivativeCurve gm_estimate(const SampleSet& samples, const KernelSpec& kernel, double h,
                            std::vector<double> grid, int ell, const GmOptions& opts = {});

/// Pointwise large-sample sd of the estimate on the grid.
std::vector<double> asymptotic_sd_curve(const SampleSet& samples, const KernelSpec& kernel,
                                        double h, const std::vector<double>& grid);

/// GCV halfwidth over the candidate list, scored with the order-0 smoother
/// restricted to design points whose window stays inside [0, 1].
double gcv_bandwidth(const SampleSet& samples, const KernelSpec& kernel,
                     const std::vector<double>& candidates);

/// Logarithmic candidate grid, points_per_decade points per decade.
std::vector<double> log_spaced(double lo, double hi, int points_per_decade = 25);

/// Uniform grid over [a, b] with points_per_halfwidth points per halfwidth h.
std::vector<double> halfwidth_grid(double a, double b, double h, int points_per_halfwidth = 8);

}  // namespace shapefit

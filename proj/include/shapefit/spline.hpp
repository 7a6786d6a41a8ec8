#pragma once

#include "shapefit/design.hpp"
#include "shapefit/kernels.hpp"

#include <memory>
#include <vector>

namespace shapefit {

namespace detail {
struct SplineCore;
struct ModelAccess;
}

struct GreenRow {
    double t = 0.0;
    int deriv = 0;
    std::vector<double> weights;  // one per design point
};

/// Order-2m smoothing spline fit, evaluable with derivatives below 2m.
class SplineModel {
public:
    SplineModel() = default;

    int penalty_order() const;
    double lambda() const { return lambda_; }
    double evaluate(double t, int deriv = 0) const;
    std::vector<double> evaluate_grid(const std::vector<double>& grid, int deriv = 0) const;

    double hat_trace() const { return trace_; }
    double objective() const;         // value of the fitted variational problem
    double penalty_integral() const;  // int (f^(m))^2, exact
    double weighted_rss() const;      // (1/n) sum (y_i - f(t_i))^2 / sigma_i^2
    const std::vector<double>& coefficients() const { return coef_; }
    const SampleSet& samples() const;

    /// Row of the linear smoother for the deriv-th derivative at t.
    GreenRow green_row(double t, int deriv = 0) const;

    /// Local halfwidth of the equivalent kernel at t.
    double equivalent_halfwidth(double t) const;

private:
    std::shared_ptr<const detail::SplineCore> core_;
    std::shared_ptr<const void> fact_;  // BandLDLT of the fitted system
    std::vector<double> coef_;
    double lambda_ = 0.0;
    double trace_ = 0.0;

    friend struct detail::ModelAccess;
};

SplineModel fit_spline(const SampleSet& samples, int m, double lambda);

/// GCV choice of lambda over the candidate list.
double gcv_lambda(const SampleSet& samples, int m, const std::vector<double>& candidates);

/// Sup distance between the scaled smoother row at t and the equivalent
/// kernel, on the standardized grid of design points.
double equivalent_kernel_error(const SplineModel& model, const KernelSpec& kernel, double t);

}  // namespace shapefit

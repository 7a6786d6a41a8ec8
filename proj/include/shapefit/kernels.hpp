#pragma once

#include <vector>

namespace shapefit {

enum class KernelForm { polynomial, spline_equivalent };

/// A derivative-estimating kernel. Polynomial kernels live on [-1, 1] and
/// vanish to second order at the endpoints; spline-equivalent kernels decay
/// exponentially on the whole line.
struct KernelSpec {
    int ell = 0;                        // derivative order the kernel targets
    KernelForm form = KernelForm::polynomial;
    std::vector<double> coefficients;   // monomial basis, polynomial case
    int m = 0;                          // spline order, spline-equivalent case

    bool compact_support() const { return form == KernelForm::polynomial; }
};

/// Minimal-degree polynomial kernel p(s)(1-s^2)^3 whose moments single out
/// the ell-th derivative.
KernelSpec build_extended_kernel(int ell);

/// Kernel solving (-1)^m k^(2m) + k = delta with decay at infinity,
/// normalized so its integral is 1.
KernelSpec equivalent_spline_kernel(int m);

/// deriv-th derivative at s (0 outside the support of polynomial kernels;
/// right-limit convention at s = 0 for spline-equivalent kernels).
double evaluate_kernel(const KernelSpec& spec, double s, int deriv = 0);

/// Integral of s^j times the kernel. Exact for polynomial kernels.
double kernel_moment(const KernelSpec& spec, int j);

/// L2 norm of the order-th derivative. Exact for polynomial kernels.
double kernel_deriv_norm(const KernelSpec& spec, int order);

}  // namespace shapefit

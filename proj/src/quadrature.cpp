#include "shapefit/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shapefit {

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
    if (!(a < b)) return 0.0;
    double error = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, 14, rel_tol, &error);
    if (!std::isfinite(v)) throw std::runtime_error("integrate_adaptive: integral did not converge");
    return v;
}

namespace {
// 6-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNodes[6] = {
    -0.9324695142031520278123016, -0.6612093864662645136613996,
    -0.2386191860831969086305017, 0.2386191860831969086305017,
    0.6612093864662645136613996,  0.9324695142031520278123016};
constexpr double kGlWeights[6] = {
    0.1713244923791703450402961, 0.3607615730481386075698335,
    0.4679139345726910473898703, 0.4679139345726910473898703,
    0.3607615730481386075698335, 0.1713244923791703450402961};
}  // namespace

double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> breakpoints) {
    double total = 0.0;
    double comp = 0.0;  // Kahan correction
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        const double a = breakpoints[p];
        const double b = breakpoints[p + 1];
        if (!(b > a)) continue;
        const double c = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double panel = 0.0;
        for (int q = 0; q < 6; ++q) panel += kGlWeights[q] * f(c + half * kGlNodes[q]);
        panel *= half;
        const double t = total + (panel - comp);
        comp = (t - total) - (panel - comp);
        total = t;
    }
    return total;
}

std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b,
                                      double lo, double hi) {
    std::vector<double> out;
    out.reserve(a.size() + b.size() + 2);
    out.push_back(lo);
    for (double v : a)
        if (v > lo && v < hi) out.push_back(v);
    for (double v : b)
        if (v > lo && v < hi) out.push_back(v);
    out.push_back(hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace shapefit

#include "shapefit/kernels.hpp"

#include "shapefit/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace shapefit {

namespace {

// (1-s^2)^3 = 1 - 3s^2 + 3s^4 - s^6
constexpr double kWindow[7] = {1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};

std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

std::vector<double> poly_derivative(std::vector<double> p, int times) {
    for (int t = 0; t < times; ++t) {
        if (p.size() <= 1) return {0.0};
        std::vector<double> q(p.size() - 1);
        for (std::size_t i = 1; i < p.size(); ++i) q[i - 1] = static_cast<double>(i) * p[i];
        p = std::move(q);
    }
    return p;
}

double poly_eval(const std::vector<double>& p, double s) {
    double v = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) v = v * s + p[i];
    return v;
}

// Exact integral over [-1, 1] of s^j * p(s).
double poly_weighted_integral(const std::vector<double>& p, int j) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int pw = static_cast<int>(i) + j;
        if (pw % 2 == 0) total += 2.0 * p[i] / static_cast<double>(pw + 1);
    }
    return total;
}

double factorial(int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i) v *= i;
    return v;
}

// Characteristic roots of (-1)^m r^{2m} + 1 = 0 in the upper half plane,
// as frequencies omega_j = exp(i pi (2j+1) / 2m), j = 0..m-1.
std::vector<std::complex<double>> upper_roots(int m) {
    std::vector<std::complex<double>> w(m);
    for (int j = 0; j < m; ++j) {
        const double arg = std::numbers::pi * (2.0 * j + 1.0) / (2.0 * m);
        w[j] = std::polar(1.0, arg);
    }
    return w;
}

double spline_kernel_eval(int m, double t, int deriv) {
    const auto roots = upper_roots(m);
    const double x = std::abs(t);
    std::complex<double> sum(0.0, 0.0);
    const std::complex<double> iunit(0.0, 1.0);
    for (const auto& w : roots) {
        sum += w * std::pow(iunit * w, deriv) * std::exp(iunit * w * x);
    }
    double v = std::real(-iunit * sum / (2.0 * m));
    if (t < 0.0 && deriv % 2 == 1) v = -v;
    return v;
}

}  // namespace

KernelSpec build_extended_kernel(int ell) {
    if (ell < 0) throw std::invalid_argument("build_extended_kernel: ell must be >= 0");
    const int dim = ell + 2;

    // Moment system for p(s) = sum c_i s^i against weight (1-s^2)^3:
    // integral s^j s^i (1-s^2)^3 ds = ell! delta_{j,ell}, 0 <= j < ell+2.
    Eigen::MatrixXd a(dim, dim);
    std::vector<double> window(kWindow, kWindow + 7);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
            std::vector<double> mono(i + 1, 0.0);
            mono[i] = 1.0;
            a(j, i) = poly_weighted_integral(poly_multiply(mono, window), j);
        }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    rhs(ell) = factorial(ell);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw std::runtime_error("build_extended_kernel: singular moment system");
    const Eigen::VectorXd c = lu.solve(rhs);

    std::vector<double> p(c.data(), c.data() + dim);
    KernelSpec spec;
    spec.ell = ell;
    spec.form = KernelForm::polynomial;
    spec.coefficients = poly_multiply(p, window);
    return spec;
}

KernelSpec equivalent_spline_kernel(int m) {
    if (m < 1) throw std::invalid_argument("equivalent_spline_kernel: m must be >= 1");
    KernelSpec spec;
    spec.ell = 0;
    spec.form = KernelForm::spline_equivalent;
    spec.m = m;
    return spec;
}

double evaluate_kernel(const KernelSpec& spec, double s, int deriv) {
    if (deriv < 0) throw std::invalid_argument("evaluate_kernel: deriv must be >= 0");
    if (spec.form == KernelForm::polynomial) {
        if (s < -1.0 || s > 1.0) return 0.0;
        return poly_eval(poly_derivative(spec.coefficients, deriv), s);
    }
    return spline_kernel_eval(spec.m, s, deriv);
}

double kernel_moment(const KernelSpec& spec, int j) {
    if (j < 0) throw std::invalid_argument("kernel_moment: j must be >= 0");
    if (spec.form == KernelForm::polynomial) {
        return poly_weighted_integral(spec.coefficients, j);
    }
    // Even symmetry kills odd moments; integrate the decaying tail.
    if (j % 2 == 1) return 0.0;
    const double decay = std::sin(std::numbers::pi / (2.0 * spec.m));
    const double tail = 60.0 / decay;
    const double half = integrate_adaptive(
        [&](double t) { return std::pow(t, j) * spline_kernel_eval(spec.m, t, 0); }, 0.0, tail);
    return 2.0 * half;
}

double kernel_deriv_norm(const KernelSpec& spec, int order) {
    if (order < 0) throw std::invalid_argument("kernel_deriv_norm: order must be >= 0");
    if (spec.form == KernelForm::polynomial) {
        const auto d = poly_derivative(spec.coefficients, order);
        return std::sqrt(poly_weighted_integral(poly_multiply(d, d), 0));
    }
    const double decay = std::sin(std::numbers::pi / (2.0 * spec.m));
    const double tail = 60.0 / decay;
    const double half = integrate_adaptive(
        [&](double t) {
            const double v = spline_kernel_eval(spec.m, t, order);
            return v * v;
        },
        0.0, tail);
    return std::sqrt(2.0 * half);
}

}  // namespace shapefit

#include "shapefit/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace shapefit {

namespace {

// Midpoint gap weights (t_{i+1} - t_{i-1})/2 with the endpoints duplicated.
std::vector<double> gap_weights(const std::vector<double>& t) {
    const int n = static_cast<int>(t.size());
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        const double lo = (i == 0) ? t[0] : t[i - 1];
        const double hi = (i == n - 1) ? t[n - 1] : t[i + 1];
        w[i] = 0.5 * (hi - lo);
    }
    return w;
}

double poly_kernel_sum(const SampleSet& samples, const KernelSpec& kernel, double t, double h,
                       int deriv, const std::vector<double>& gaps) {
    // Kernel evaluated at (t_i - t)/h so that positive-moment kernels estimate
    // +f^(ell); compact support limits the sum to [t-h, t+h].
    const auto& pts = samples.design.points;
    const auto lo = std::lower_bound(pts.begin(), pts.end(), t - h);
    const auto hi = std::upper_bound(pts.begin(), pts.end(), t + h);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const int i = static_cast<int>(it - pts.begin());
        s += samples.y[i] * evaluate_kernel(kernel, (*it - t) / h, deriv) * gaps[i];
    }
    return s;
}

}  // namespace

double DerivativeCurve::interpolate(double t) const {
    if (grid.empty()) throw std::runtime_error("DerivativeCurve: empty curve");
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const int j = static_cast<int>(it - grid.begin());
    const double w = (t - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return (1.0 - w) * values[j - 1] + w * values[j];
}

DerivativeCurve gm_estimate(const SampleSet& samples, const KernelSpec& kernel, double h,
                            std::vector<double> grid, int ell, const GmOptions& opts) {
    if (!(h > 0.0)) throw std::invalid_argument("gm_estimate: halfwidth must be positive");
    if (kernel.form != KernelForm::polynomial)
        throw std::invalid_argument("gm_estimate: needs a compactly supported kernel");
    if (kernel.ell != ell)
        throw std::invalid_argument("gm_estimate: kernel was built for a different ell");
    DerivativeCurve out;
    out.ell = ell;
    out.halfwidth = h;
    out.values.resize(grid.size());
    if (opts.allow_boundary) out.boundary_flag.assign(grid.size(), 0);

    const auto gaps = gap_weights(samples.design.points);
    const double scale = std::pow(h, -(ell + 1.0));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double t = grid[g];
        const bool interior = (t - h >= -1e-12) && (t + h <= 1.0 + 1e-12);
        if (!interior) {
            if (!opts.allow_boundary)
                throw std::invalid_argument("gm_estimate: grid point " + std::to_string(t) +
                                            " has a kernel window outside [0,1]");
            out.boundary_flag[g] = 1;
        }
        out.values[g] = scale * poly_kernel_sum(samples, kernel, t, h, 0, gaps);
    }
    out.grid = std::move(grid);
    return out;
}

std::vector<double> asymptotic_sd_curve(const SampleSet& samples, const KernelSpec& kernel,
                                        double h, const std::vector<double>& grid) {
    if (!(h > 0.0)) throw std::invalid_argument("asymptotic_sd_curve: h must be positive");
    const int ell = kernel.ell;
    const double norm0 = kernel_deriv_norm(kernel, 0);
    const double sig2 = sigma_scale(samples) * sigma_scale(samples);
    const double n = samples.size();
    std::vector<double> sd(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double fp = design_density(samples.design, grid[g]);
        sd[g] = std::sqrt(sig2 * norm0 * norm0 * fp / (n * std::pow(h, 2.0 * ell + 1.0)));
    }
    return sd;
}

double gcv_bandwidth(const SampleSet& samples, const KernelSpec& kernel,
                     const std::vector<double>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("gcv_bandwidth: no candidates");
    if (kernel.ell != 0)
        throw std::invalid_argument("gcv_bandwidth: the GCV score uses an order-0 kernel");
    const auto& pts = samples.design.points;
    const int n = samples.size();
    const auto gaps = gap_weights(pts);
    const double k0 = evaluate_kernel(kernel, 0.0, 0);

    double best_h = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double h : candidates) {
        if (!(h > 0.0)) throw std::invalid_argument("gcv_bandwidth: candidates must be positive");
        double rss = 0.0;
        double tr = 0.0;
        int interior = 0;
        for (int i = 0; i < n; ++i) {
            const double t = pts[i];
            if (t - h < -1e-12 || t + h > 1.0 + 1e-12) continue;
            ++interior;
            double fit = 0.0;
            const auto lo = std::lower_bound(pts.begin(), pts.end(), t - h);
            const auto hi = std::upper_bound(pts.begin(), pts.end(), t + h);
            for (auto it = lo; it != hi; ++it) {
                const int j = static_cast<int>(it - pts.begin());
                fit += samples.y[j] * evaluate_kernel(kernel, (*it - t) / h, 0) * gaps[j];
            }
            fit /= h;
            const double r = samples.y[i] - fit;
            rss += r * r;
            tr += 1.0 - k0 * gaps[i] / h;
        }
        if (interior == 0 || !(tr > 0.0)) continue;
        const double score = interior * rss / (tr * tr);
        any = true;
        if (score < best_score) {
            best_score = score;
            best_h = h;
        }
    }
    if (!any)
        throw std::runtime_error("gcv_bandwidth: every candidate halfwidth was degenerate");
    return best_h;
}

std::vector<double> log_spaced(double lo, double hi, int points_per_decade) {
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("log_spaced: need 0 < lo < hi");
    const double decades = std::log10(hi / lo);
    const int count = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)) + 1);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo * std::pow(10.0, decades * i / (count - 1));
    return out;
}

std::vector<double> halfwidth_grid(double a, double b, double h, int points_per_halfwidth) {
    if (!(b > a)) throw std::invalid_argument("halfwidth_grid: need a < b");
    const int count = std::max(2, static_cast<int>(std::ceil((b - a) / h * points_per_halfwidth)) + 1);
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = a + (b - a) * i / (count - 1);
    return g;
}

}  // namespace shapefit

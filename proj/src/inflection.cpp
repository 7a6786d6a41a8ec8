#include "shapefit/inflection.hpp"

#include "shapefit/gaussian.hpp"
#include "shapefit/parallel.hpp"
#include "shapefit/quadrature.hpp"
#include "shapefit/rng.hpp"
#include "shapefit/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shapefit {

InflectionReport count_sign_changes(const std::vector<double>& grid,
                                    const std::vector<double>& values, double tol) {
    if (grid.size() != values.size())
        throw std::invalid_argument("count_sign_changes: grid/value size mismatch");
    if (tol < 0.0) {
        double vmax = 0.0;
        for (double v : values) vmax = std::max(vmax, std::abs(v));
        tol = 1e-3 * vmax;
    }
    InflectionReport report;
    int last_sign = 0;
    double last_t = 0.0, last_v = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = std::abs(values[i]) < tol ? 0.0 : values[i];
        const int s = (v > 0.0) - (v < 0.0);
        if (s == 0) continue;
        if (last_sign != 0 && s != last_sign) {
            // Interpolate across the run of clamped zeros, if any.
            const double t = last_t + (grid[i] - last_t) * last_v / (last_v - values[i]);
            report.crossing_locations.push_back(t);
        }
        last_sign = s;
        last_t = grid[i];
        last_v = values[i];
    }
    report.crossing_count = static_cast<int>(report.crossing_locations.size());
    return report;
}

InflectionReport count_sign_changes(const DerivativeCurve& curve, double tol) {
    return count_sign_changes(curve.grid, curve.values, tol);
}

double h_function(double z) {
    if (!(z > 0.0)) throw std::invalid_argument("h_function: z must be positive");
    return normal_pdf(z) / z + normal_cdf(z) - 1.0;
}

double expected_false_inflections(const std::vector<TrueInflection>& inflections, int n, double h,
                                  double sigma, const KernelSpec& kernel, const DesignInfo& design,
                                  bool literal_norm) {
    if (!(h > 0.0) || n <= 0 || !(sigma >= 0.0))
        throw std::invalid_argument("expected_false_inflections: bad parameters");
    if (sigma == 0.0) return 0.0;
    const int ell = kernel.ell;
    // The slope kernel of the estimate is the first derivative of the
    // ell-kernel; squared norm unless the literal printed form is requested.
    const double knorm = kernel_deriv_norm(kernel, 1);
    const double norm_factor = literal_norm ? knorm : knorm * knorm;
    double total = 0.0;
    std::vector<double> zs;
    for (const auto& pt : inflections) {
        if (pt.slope == 0.0)
            throw std::invalid_argument("expected_false_inflections: zero slope at an inflection");
        const double fp = design_density(design, pt.location);
        const double z2 = n * std::pow(h, 2.0 * ell + 3.0) * pt.slope * pt.slope /
                          (sigma * sigma * norm_factor * fp);
        total += 2.0 * h_function(std::sqrt(z2));
    }
    return total;
}

namespace {

double numeric_derivative(const std::function<double(double)>& f, double s) {
    const double h = 1e-5 * std::max(1.0, std::abs(s));
    return (f(s - 2 * h) - 8 * f(s - h) + 8 * f(s + h) - f(s + 2 * h)) / (12 * h);
}

}  // namespace

double cramer_leadbetter_count(const ProcessStats& stats) {
    if (!(stats.b > stats.a)) throw std::invalid_argument("cramer_leadbetter_count: empty interval");
    auto integrand = [&](double s) {
        const double sd = stats.sd(s);
        const double gamma = stats.deriv_sd(s);
        const double mu = stats.corr(s);
        if (!(sd > 0.0) || !(gamma > 0.0) || !(std::abs(mu) < 1.0))
            throw std::runtime_error("cramer_leadbetter_count: invalid process statistics");
        const double rho = std::sqrt(1.0 - mu * mu);
        const double m = stats.mean(s);
        const double mprime = stats.mean_deriv ? stats.mean_deriv(s)
                                               : numeric_derivative(stats.mean, s);
        const double eta = (mprime - gamma * mu * m / sd) / (gamma * rho);
        const double crossing_rate = 2.0 * normal_pdf(eta) + eta * (2.0 * normal_cdf(eta) - 1.0);
        return gamma * rho / sd * normal_pdf(m / sd) * crossing_rate;
    };
    return integrate_adaptive(integrand, stats.a, stats.b, 1e-12);
}

std::vector<double> analytic_crossings(const std::function<double(double, int)>& f, int deriv,
                                       double a, double b) {
    const int scan = 2048;
    std::vector<double> out;
    double prev_t = a;
    double prev_v = f(a, deriv);
    for (int i = 1; i <= scan; ++i) {
        const double t = a + (b - a) * i / scan;
        const double v = f(t, deriv);
        if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
            double lo = prev_t, hi = t, flo = prev_v;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid, deriv);
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev_t = t;
        prev_v = v;
    }
    return out;
}

namespace {

struct ScenarioSetup {
    SampleSet base;                 // noise-free samples
    std::vector<double> truth;      // f at the design points
    std::vector<double> grid;       // counting grid
    KernelSpec kernel;              // kernel method only
    std::vector<TrueInflection> inflections;
    int k_true = 0;
};

ScenarioSetup prepare(const Scenario& sc) {
    if (sc.n < 4) throw std::invalid_argument("scenario: n too small");
    if (!(sc.b > sc.a) || sc.a < 0.0 || sc.b > 1.0)
        throw std::invalid_argument("scenario: counting interval must sit inside [0,1]");
    ScenarioSetup setup;
    auto design = DesignInfo::uniform(midpoint_design(sc.n));
    setup.truth.resize(sc.n);
    for (int i = 0; i < sc.n; ++i) setup.truth[i] = sc.f(design.points[i], 0);
    const double sig = sc.sigma > 0.0 ? sc.sigma : 1.0;
    setup.base = make_samples(std::move(design), setup.truth, sig);

    const double h = sc.method == Scenario::Method::kernel
                         ? sc.halfwidth
                         : std::pow(0.5 * sc.lambda * sc.sigma * sc.sigma, 1.0 / (2.0 * sc.m));
    if (!(h > 0.0)) throw std::invalid_argument("scenario: needs a positive halfwidth or lambda");
    setup.grid = halfwidth_grid(sc.a, sc.b, h, sc.points_per_halfwidth);
    if (sc.method == Scenario::Method::kernel) setup.kernel = build_extended_kernel(sc.ell);

    for (double x : analytic_crossings(sc.f, sc.ell, sc.a, sc.b))
        setup.inflections.push_back({x, sc.f(x, sc.ell + 1)});
    setup.k_true = static_cast<int>(setup.inflections.size());
    return setup;
}

std::vector<double> estimate_curve(const Scenario& sc, const ScenarioSetup& setup,
                                   const std::vector<double>& y) {
    SampleSet samples = setup.base;
    samples.y = y;
    if (sc.method == Scenario::Method::kernel) {
        return gm_estimate(samples, setup.kernel, sc.halfwidth, setup.grid, sc.ell).values;
    }
    return fit_spline(samples, sc.m, sc.lambda).evaluate_grid(setup.grid, sc.ell);
}

void check_hypotheses(const Scenario& sc, const ScenarioSetup& setup, McInflectionResult& out) {
    for (const auto& pt : setup.inflections)
        if (std::abs(pt.slope) < 1e-12)
            out.warnings.push_back("slope of f^(ell+1) vanishes at an inflection point");
    if (std::abs(sc.f(sc.a, sc.ell)) < 1e-12 || std::abs(sc.f(sc.b, sc.ell)) < 1e-12)
        out.warnings.push_back("f^(ell) vanishes at an interval endpoint");
    out.d_n = empirical_discrepancy(setup.base.design);
    out.d_n_ok = out.d_n < 1.0 / std::sqrt(static_cast<double>(sc.n));
    if (!out.d_n_ok) out.warnings.push_back("design discrepancy exceeds n^{-1/2}");
}

}  // namespace

McInflectionResult monte_carlo_inflections(const Scenario& sc, int replicates,
                                           std::uint64_t seed) {
    if (replicates < 1) throw std::invalid_argument("monte_carlo_inflections: needs replicates >= 1");
    const ScenarioSetup setup = prepare(sc);
    McInflectionResult out;
    out.k_true = setup.k_true;
    check_hypotheses(sc, setup, out);

    if (sc.method == Scenario::Method::kernel) {
        out.expected_excess =
            expected_false_inflections(setup.inflections, sc.n, sc.halfwidth, sc.sigma,
                                       setup.kernel, setup.base.design, sc.literal_norm);
        const double knorm = kernel_deriv_norm(setup.kernel, 1);
        const double nf = sc.literal_norm ? knorm : knorm * knorm;
        for (const auto& pt : setup.inflections)
            out.z_values.push_back(std::sqrt(
                sc.n * std::pow(sc.halfwidth, 2.0 * sc.ell + 3.0) * pt.slope * pt.slope /
                (sc.sigma * sc.sigma * nf * design_density(setup.base.design, pt.location))));
    } else {
        // Equivalent-kernel halfwidth carries the prediction to splines.
        const KernelSpec eq = equivalent_spline_kernel(sc.m);
        const double knorm = kernel_deriv_norm(eq, sc.ell + 1);
        const double nf = sc.literal_norm ? knorm : knorm * knorm;
        double total = 0.0;
        for (const auto& pt : setup.inflections) {
            const double fp = design_density(setup.base.design, pt.location);
            const double h = std::pow(0.5 * sc.lambda * sc.sigma * sc.sigma / fp,
                                      1.0 / (2.0 * sc.m));
            const double z2 = sc.n * std::pow(h, 2.0 * sc.ell + 3.0) * pt.slope * pt.slope /
                              (sc.sigma * sc.sigma * nf * fp);
            out.z_values.push_back(std::sqrt(z2));
            total += 2.0 * h_function(std::sqrt(z2));
        }
        out.expected_excess = total;
    }
    out.predicted = out.k_true + out.expected_excess;

    out.counts.assign(replicates, 0);
    out.locations.assign(replicates, {});
    parallel_for(replicates, [&](int r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<double> y(setup.truth);
        for (double& v : y) v += sc.sigma * rng.next_normal();
        const auto values = estimate_curve(sc, setup, y);
        double vmax = 0.0;
        for (double v : values) vmax = std::max(vmax, std::abs(v));
        auto rep = count_sign_changes(setup.grid, values, sc.tol_factor * vmax);
        out.counts[r] = rep.crossing_count;
        out.locations[r] = std::move(rep.crossing_locations);
    });

    std::vector<double> as_double(out.counts.begin(), out.counts.end());
    out.mean_count = kahan_sum(as_double) / replicates;
    double ss = 0.0;
    for (double c : as_double) ss += (c - out.mean_count) * (c - out.mean_count);
    out.se = replicates > 1 ? std::sqrt(ss / (replicates - 1.0) / replicates) : 0.0;
    return out;
}

LocalizationResult false_inflection_localization(const Scenario& sc, int replicates, double delta,
                                                 std::uint64_t seed) {
    if (replicates < 1) throw std::invalid_argument("false_inflection_localization: replicates >= 1");
    const ScenarioSetup setup = prepare(sc);
    std::vector<int> flagged(replicates, 0);
    parallel_for(replicates, [&](int r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        std::vector<double> y(setup.truth);
        for (double& v : y) v += sc.sigma * rng.next_normal();
        const auto values = estimate_curve(sc, setup, y);
        double vmax = 0.0;
        for (double v : values) vmax = std::max(vmax, std::abs(v));
        const auto rep = count_sign_changes(setup.grid, values, sc.tol_factor * vmax);
        for (double loc : rep.crossing_locations) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& pt : setup.inflections)
                nearest = std::min(nearest, std::abs(loc - pt.location));
            if (nearest > delta) {
                flagged[r] = 1;
                break;
            }
        }
    });
    LocalizationResult out;
    out.replicates = replicates;
    for (int f : flagged) out.flagged += f;
    out.fraction = static_cast<double>(out.flagged) / replicates;
    return out;
}

}  // namespace shapefit

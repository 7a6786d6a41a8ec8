#include "shapefit/spline.hpp"

#include "shapefit/banded.hpp"
#include "spline_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shapefit {

namespace detail {

namespace {
// Gauss-Legendre nodes up to 6 points (positive half; symmetric).
struct GlRule {
    std::vector<double> nodes, weights;
};
GlRule gl_rule(int q) {
    switch (q) {
        case 1: return {{0.0}, {2.0}};
        case 2: return {{-0.5773502691896257645091488, 0.5773502691896257645091488}, {1.0, 1.0}};
        case 3:
            return {{-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531},
                    {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
        case 4:
            return {{-0.8611363115940525752239465, -0.3399810435848562648026658,
                     0.3399810435848562648026658, 0.8611363115940525752239465},
                    {0.3478548451374538573730639, 0.6521451548625461426269361,
                     0.6521451548625461426269361, 0.3478548451374538573730639}};
        default:
            return {{-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
                     0.5384693101056830910363144, 0.9061798459386639927976269},
                    {0.2369268850561890875142640, 0.4786286704993664680412915, 128.0 / 225.0,
                     0.4786286704993664680412915, 0.2369268850561890875142640}};
    }
}
}  // namespace

std::shared_ptr<const SplineCore> SplineCore::build(const SampleSet& samples, int m) {
    if (m < 1 || m > 5) throw std::invalid_argument("fit_spline: m must be in 1..5");
    const int n = samples.size();
    if (n <= m) throw std::invalid_argument("fit_spline: needs n > m data points");
    for (int i = 1; i < n; ++i)
        if (!(samples.design.points[i] > samples.design.points[i - 1]))
            throw std::invalid_argument("fit_spline: design points must be distinct");

    const int order = 2 * m;
    auto core = std::shared_ptr<SplineCore>(
        new SplineCore(samples, m, BSplineBasis(samples.design.points, order)));

    const auto& basis = core->basis;
    const int k = order;
    const int nb = basis.num_basis();

    // Penalty matrix by per-span Gauss quadrature (exact: the integrand is a
    // piecewise polynomial of degree 2m-2 on each span).
    const GlRule rule = gl_rule(std::min(5, std::max(1, m)));
    const auto& knots = basis.knots();
    std::vector<double> work(static_cast<std::size_t>(m + 1) * k);
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
        const double a = knots[s], b = knots[s + 1];
        if (!(b > a)) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double x = mid + half * rule.nodes[q];
            const double wq = half * rule.weights[q];
            const int first = basis.eval(x, m, work.data());
            const double* dm = work.data() + static_cast<std::size_t>(m) * k;
            for (int aa = 0; aa < k; ++aa)
                for (int bb = 0; bb <= aa; ++bb)
                    core->omega.add(first + aa, first + bb, wq * dm[aa] * dm[bb]);
        }
    }

    core->btwy.assign(nb, 0.0);
    core->w.resize(n);
    core->data_rows.resize(static_cast<std::size_t>(n) * k);
    core->data_first.resize(n);
    core->ytwy = 0.0;
    std::vector<double> vals(k);
    for (int i = 0; i < n; ++i) {
        core->w[i] = 1.0 / (n * samples.sigma[i] * samples.sigma[i]);
        const int first = basis.eval(samples.design.points[i], 0, vals.data());
        core->data_first[i] = first;
        for (int a = 0; a < k; ++a) {
            core->data_rows[static_cast<std::size_t>(i) * k + a] = vals[a];
            core->btwy[first + a] += core->w[i] * vals[a] * samples.y[i];
            for (int b = 0; b <= a; ++b)
                core->btwb.add(first + a, first + b, core->w[i] * vals[a] * vals[b]);
        }
        core->ytwy += core->w[i] * samples.y[i] * samples.y[i];
    }
    return core;
}

double SplineCore::row_dot(int i, std::span<const double> c) const {
    const int k = basis.order();
    const double* row = data_rows.data() + static_cast<std::size_t>(i) * k;
    const int first = data_first[i];
    double v = 0.0;
    for (int a = 0; a < k; ++a) v += row[a] * c[first + a];
    return v;
}

SymBand SplineCore::system_matrix(double lambda) const {
    return SymBand::combine(0.5 * lambda, omega, 1.0, btwb);
}

SplineCore::Solution SplineCore::solve(double lambda, bool need_trace) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("fit_spline: lambda must be positive");
    Solution sol;
    auto fact = std::make_shared<BandLDLT>(system_matrix(lambda));
    sol.coef = fact->solve(btwy);
    if (need_trace) {
        const SymBand z = fact->inverse_band();
        const int k = basis.order();
        double tr = 0.0;
        for (int i = 0; i < samples.size(); ++i) {
            const double* row = data_rows.data() + static_cast<std::size_t>(i) * k;
            const int first = data_first[i];
            double q = 0.0;
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    q += row[a] * row[b] * z.get(first + a, first + b);
            tr += w[i] * q;
        }
        sol.hat_trace = tr;
    }
    sol.factorization = std::move(fact);
    return sol;
}

struct ModelAccess {
    static SplineModel make(std::shared_ptr<const SplineCore> core, SplineCore::Solution sol,
                            double lambda) {
        SplineModel m;
        m.core_ = std::move(core);
        m.fact_ = std::move(sol.factorization);
        m.coef_ = std::move(sol.coef);
        m.lambda_ = lambda;
        m.trace_ = sol.hat_trace;
        return m;
    }
    static const SplineCore& core(const SplineModel& m) { return *m.core_; }
    static const BandLDLT& fact(const SplineModel& m) {
        return *static_cast<const BandLDLT*>(m.fact_.get());
    }
};

SplineModel make_spline_model(std::shared_ptr<const SplineCore> core, SplineCore::Solution sol,
                              double lambda) {
    return ModelAccess::make(std::move(core), std::move(sol), lambda);
}

}  // namespace detail

int SplineModel::penalty_order() const { return detail::ModelAccess::core(*this).m; }

const SampleSet& SplineModel::samples() const { return detail::ModelAccess::core(*this).samples; }

double SplineModel::evaluate(double t, int deriv) const {
    const auto& core = detail::ModelAccess::core(*this);
    const int k = core.basis.order();
    if (deriv >= 2 * core.m)
        throw std::invalid_argument("SplineModel: derivative order must be below 2m");
    std::vector<double> work(static_cast<std::size_t>(deriv + 1) * k);
    const int first = core.basis.eval(t, deriv, work.data());
    const double* row = work.data() + static_cast<std::size_t>(deriv) * k;
    double v = 0.0;
    for (int a = 0; a < k; ++a) v += row[a] * coef_[first + a];
    return v;
}

std::vector<double> SplineModel::evaluate_grid(const std::vector<double>& grid, int deriv) const {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = evaluate(grid[i], deriv);
    return out;
}

double SplineModel::penalty_integral() const {
    const auto& core = detail::ModelAccess::core(*this);
    const auto oc = core.omega.multiply(coef_);
    double v = 0.0;
    for (std::size_t i = 0; i < oc.size(); ++i) v += coef_[i] * oc[i];
    return v;
}

double SplineModel::weighted_rss() const {
    const auto& core = detail::ModelAccess::core(*this);
    double rss = 0.0;
    for (int i = 0; i < core.samples.size(); ++i) {
        const double r = core.samples.y[i] - core.row_dot(i, coef_);
        rss += core.w[i] * r * r;
    }
    return rss;
}

double SplineModel::objective() const {
    return 0.5 * lambda_ * penalty_integral() + weighted_rss();
}

GreenRow SplineModel::green_row(double t, int deriv) const {
    const auto& core = detail::ModelAccess::core(*this);
    GreenRow row;
    row.t = t;
    row.deriv = deriv;
    std::vector<double> rhs = core.basis.derivative_row(t, deriv);
    detail::ModelAccess::fact(*this).solve_in_place(rhs);
    const int n = core.samples.size();
    row.weights.resize(n);
    for (int i = 0; i < n; ++i) row.weights[i] = core.w[i] * core.row_dot(i, rhs);
    return row;
}

double SplineModel::equivalent_halfwidth(double t) const {
    const auto& core = detail::ModelAccess::core(*this);
    const auto& pts = core.samples.design.points;
    const auto it = std::lower_bound(pts.begin(), pts.end(), t);
    int idx = static_cast<int>(it - pts.begin());
    if (idx >= core.samples.size()) idx = core.samples.size() - 1;
    if (idx > 0 && std::abs(pts[idx - 1] - t) < std::abs(pts[idx] - t)) --idx;
    const double sig2 = core.samples.sigma[idx] * core.samples.sigma[idx];
    const double fp = design_density(core.samples.design, t);
    return std::pow(0.5 * lambda_ * sig2 / fp, 1.0 / (2.0 * core.m));
}

SplineModel fit_spline(const SampleSet& samples, int m, double lambda) {
    auto core = detail::SplineCore::build(samples, m);
    auto sol = core->solve(lambda, true);
    return detail::make_spline_model(std::move(core), std::move(sol), lambda);
}

double gcv_lambda(const SampleSet& samples, int m, const std::vector<double>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("gcv_lambda: no candidates");
    auto core = detail::SplineCore::build(samples, m);
    const int n = samples.size();
    double best = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double lambda : candidates) {
        const auto sol = core->solve(lambda, true);
        const double denom = n - sol.hat_trace;
        if (!(denom > 0.0)) continue;
        double rss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = samples.y[i] - core->row_dot(i, sol.coef);
            rss += r * r;
        }
        const double score = n * rss / (denom * denom);
        any = true;
        if (score < best_score) {
            best_score = score;
            best = lambda;
        }
    }
    if (!any) throw std::runtime_error("gcv_lambda: every candidate was degenerate");
    return best;
}

double equivalent_kernel_error(const SplineModel& model, const KernelSpec& kernel, double t) {
    const auto& core = detail::ModelAccess::core(model);
    if (kernel.form != KernelForm::spline_equivalent || kernel.m != core.m)
        throw std::invalid_argument("equivalent_kernel_error: kernel must match the spline order");
    const double h = model.equivalent_halfwidth(t);
    if (t - 6.0 * h < 0.0 || t + 6.0 * h > 1.0)
        throw std::invalid_argument("equivalent_kernel_error: t lies in the boundary zone");
    const GreenRow row = model.green_row(t, 0);
    const auto& pts = core.samples.design.points;
    const int n = core.samples.size();
    const double ft = design_density(core.samples.design, t);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = (pts[i] - t) / h;
        const double fi = design_density(core.samples.design, pts[i]);
        const double scaled = n * h * fi * row.weights[i];
        err = std::max(err, std::abs(scaled - evaluate_kernel(kernel, s)) / ft);
    }
    return err;
}

}  // namespace shapefit

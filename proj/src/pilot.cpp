#include "shapefit/pilot.hpp"

#include "shapefit/gaussian.hpp"
#include "shapefit/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shapefit {

double iota_factor(int n, int ell, int m) {
    if (n < 2) throw std::invalid_argument("iota_factor: n must be >= 2");
    const double ln = std::log(static_cast<double>(n));
    const double expnt = 1.0 / (2.0 * m + 1.0) - 1.0 / (2.0 * ell + 3.0);
    return ln * ln * std::pow(static_cast<double>(n), expnt);
}

FirstStageResult first_stage(const SampleSet& samples, int ell, int m,
                             const FirstStageOptions& opts) {
    if (ell < 1) throw std::invalid_argument("first_stage: ell must be >= 1");
    if (m < ell) throw std::invalid_argument("first_stage: needs m >= ell");
    const int n = samples.size();

    double max_gap = 0.0;
    for (int i = 1; i < n; ++i)
        max_gap = std::max(max_gap, samples.design.points[i] - samples.design.points[i - 1]);

    std::vector<double> candidates = opts.h_candidates;
    if (candidates.empty()) {
        const double lo = std::max(4.0 * max_gap, 1e-3);
        const double hi = 0.25;
        if (!(hi > lo)) throw std::invalid_argument("first_stage: design too sparse for a bandwidth grid");
        candidates = log_spaced(lo, hi, 25);
    }

    FirstStageResult out;
    out.ell = ell;
    const KernelSpec k0 = build_extended_kernel(0);
    out.h_gcv = gcv_bandwidth(samples, k0, candidates);
    out.iota = iota_factor(n, ell, m);
    out.h_n = out.iota * out.h_gcv;
    if (out.h_n >= opts.max_halfwidth || out.h_n >= 0.25) {
        if (!opts.clamp)
            throw std::invalid_argument("first_stage: degenerate bandwidth h_n >= 1/4");
        out.h_n = std::min(opts.max_halfwidth, 0.2499);
        out.clamped = true;
    }
    if (out.h_n <= max_gap)
        throw std::invalid_argument("first_stage: bandwidth below the design spacing");

    const KernelSpec kl = build_extended_kernel(ell);
    const KernelSpec klp = build_extended_kernel(ell + 1);
    const auto grid = halfwidth_grid(out.h_n, 1.0 - out.h_n, out.h_n, opts.points_per_halfwidth);
    out.curve_ell = gm_estimate(samples, kl, out.h_n, grid, ell);
    out.curve_ell_plus_1 = gm_estimate(samples, klp, out.h_n, grid, ell + 1);
    return out;
}

std::vector<UncertaintyInterval> uncertainty_intervals(const FirstStageResult& first,
                                                       const SampleSet& samples, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("uncertainty_intervals: alpha must be in (0,1)");
    const int ell = first.ell;
    const int n = samples.size();
    const double sigma = sigma_scale(samples);
    const KernelSpec kl = build_extended_kernel(ell);
    const double norm0 = kernel_deriv_norm(kl, 0);
    const double z = two_sided_z(alpha);

    std::vector<UncertaintyInterval> out;
    const auto report = count_sign_changes(first.curve_ell);
    for (double x : report.crossing_locations) {
        UncertaintyInterval iv;
        iv.center = x;
        iv.alpha = alpha;
        const double slope = first.curve_ell_plus_1.interpolate(x);
        if (std::abs(slope) < 1e-300) {
            // Vanishing slope: the location is unresolved, report the whole domain.
            iv.sd = 1.0;
            iv.lo = 0.0;
            iv.hi = 1.0;
            out.push_back(iv);
            continue;
        }
        const double fp = design_density(samples.design, x);
        iv.sd = sigma * norm0 * std::sqrt(fp) /
                (std::abs(slope) * std::sqrt(n * std::pow(first.h_n, 2.0 * ell + 1.0)));
        iv.lo = std::max(0.0, x - z * iv.sd);
        iv.hi = std::min(1.0, x + z * iv.sd);
        out.push_back(iv);
    }
    return out;
}

namespace {

// Mean sign of a curve over [lo, hi]; 0 when the stretch is empty or mixed
// beyond the tolerance.
int region_sign(const DerivativeCurve& curve, double lo, double hi) {
    double sum = 0.0, amax = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (curve.grid[i] < lo || curve.grid[i] > hi) continue;
        sum += curve.values[i];
        amax = std::max(amax, std::abs(curve.values[i]));
        ++count;
    }
    if (count == 0) {
        const double mid = std::clamp(0.5 * (lo + hi), curve.grid.front(), curve.grid.back());
        const double v = curve.interpolate(mid);
        return (v > 0.0) - (v < 0.0);
    }
    if (std::abs(sum) < 1e-12 * std::max(1.0, amax)) return 0;
    return (sum > 0.0) ? +1 : -1;
}

int crossings_inside(const DerivativeCurve& curve, double lo, double hi) {
    std::vector<double> g, v;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        if (curve.grid[i] < lo || curve.grid[i] > hi) continue;
        g.push_back(curve.grid[i]);
        v.push_back(curve.values[i]);
    }
    if (g.size() < 2) return 0;
    return count_sign_changes(g, v).crossing_count;
}

struct Cluster {
    double lo = 0.0, hi = 0.0;
    std::vector<double> centers;
};

}  // namespace

ConstraintPlan resolve_overlaps(const std::vector<UncertaintyInterval>& intervals,
                                const DerivativeCurve& curve_ell,
                                const DerivativeCurve& curve_ell_plus_1) {
    ConstraintPlan plan;
    plan.ell = curve_ell.ell;
    plan.k_hat = static_cast<int>(intervals.size());

    std::vector<UncertaintyInterval> sorted(intervals);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.center < b.center; });

    // Transitive chaining of pairwise overlaps.
    std::vector<Cluster> clusters;
    for (const auto& iv : sorted) {
        if (!clusters.empty() && iv.lo <= clusters.back().hi) {
            clusters.back().hi = std::max(clusters.back().hi, iv.hi);
            clusters.back().centers.push_back(iv.center);
        } else {
            clusters.push_back({iv.lo, iv.hi, {iv.center}});
        }
    }

    const double grid_step = curve_ell_plus_1.grid.size() > 1
                                 ? curve_ell_plus_1.grid[1] - curve_ell_plus_1.grid[0]
                                 : 0.01;
    const int ell = curve_ell.ell;

    double cursor = 0.0;
    for (std::size_t ci = 0; ci <= clusters.size(); ++ci) {
        const double gap_hi = (ci < clusters.size()) ? clusters[ci].lo : 1.0;
        if (gap_hi > cursor) {
            // Outside every cluster the pilot sign of f^(ell) is enforced.
            const int s = region_sign(curve_ell, cursor, gap_hi);
            if (s != 0)
                plan.regions.push_back({cursor, gap_hi, ell, s, PlanRegion::Rule::outside});
            else
                plan.notes.push_back("outside region has no clear sign; left unconstrained");
        }
        if (ci == clusters.size()) break;

        const Cluster& cl = clusters[ci];
        const double next_lo = (ci + 1 < clusters.size()) ? clusters[ci + 1].lo : 1.0;
        const int s_left = region_sign(curve_ell, cursor, cl.lo);
        const int s_right = region_sign(curve_ell, cl.hi, next_lo);
        const int size = static_cast<int>(cl.centers.size());

        if (size == 1) {
            // Asymptotic rule: constrain f^(ell+1) through the crossing,
            // signed to match the outer regions.
            int dir = s_right != 0 ? s_right : -s_left;
            if (dir == 0) {
                plan.notes.push_back("isolated interval with ambiguous outer signs; skipped");
            } else {
                if (s_left != 0 && s_left == s_right)
                    plan.notes.push_back("outer signs do not flip across an isolated interval");
                plan.regions.push_back({cl.lo, cl.hi, ell + 1, dir, PlanRegion::Rule::isolated});
            }
        } else if (size % 2 == 0) {
            if (s_left != 0 && s_right != 0 && s_left != s_right) {
                plan.notes.push_back("even cluster with flipping outer signs; skipped");
            } else {
                const int s = s_left != 0 ? s_left : s_right;
                if (s == 0) {
                    plan.notes.push_back("even cluster with no outer sign; skipped");
                } else {
                    plan.regions.push_back({cl.lo, cl.hi, ell, s, PlanRegion::Rule::even});
                }
            }
        } else {
            // Odd cluster: f^(ell+1) single-signed on a subregion holding an
            // even number of crossings of the pilot f^(ell+1).
            double lo = cl.lo, hi = cl.hi;
            const double min_lo = cl.centers.front() - grid_step;
            const double max_hi = cl.centers.back() + grid_step;
            while (crossings_inside(curve_ell_plus_1, lo, hi) % 2 == 1 &&
                   lo + grid_step <= min_lo && hi - grid_step >= max_hi) {
                lo += grid_step;
                hi -= grid_step;
            }
            if (crossings_inside(curve_ell_plus_1, lo, hi) % 2 == 1)
                plan.notes.push_back("odd cluster: even-crossing subregion not reachable");
            int dir = s_right != 0 ? s_right : -s_left;
            if (dir == 0) {
                plan.notes.push_back("odd cluster with ambiguous outer signs; skipped");
            } else {
                plan.regions.push_back({lo, hi, ell + 1, dir, PlanRegion::Rule::odd});
            }
        }
        cursor = cl.hi;
    }
    return plan;
}

SecondStageResult second_stage(const SampleSet& samples, const ConstraintPlan& plan, int m,
                               std::vector<double> lambda_candidates) {
    if (lambda_candidates.empty()) lambda_candidates = log_spaced(1e-8, 1.0, 25);
    SecondStageResult out;
    out.lambda_gcv = gcv_lambda(samples, m, lambda_candidates);

    std::vector<RegionConstraint> regions;
    for (const auto& r : plan.regions) regions.push_back({r.lo, r.hi, r.derivative, r.sign});
    out.fit = fit_with_constraints(samples, m, out.lambda_gcv, regions);

    const auto grid = constraint_grid(samples.size(), std::max(512, samples.size()));
    const auto values = out.fit.model.evaluate_grid(grid, plan.ell);
    out.final_crossings = count_sign_changes(grid, values).crossing_count;
    out.crossings_match = (out.final_crossings == plan.k_hat);
    return out;
}

PilotResult run_pilot(const SampleSet& samples, int ell, int m, double alpha,
                      const FirstStageOptions& opts) {
    PilotResult out;
    out.sigma_used = sigma_scale(samples);
    out.first = first_stage(samples, ell, m, opts);
    out.intervals = uncertainty_intervals(out.first, samples, alpha);
    out.plan = resolve_overlaps(out.intervals, out.first.curve_ell, out.first.curve_ell_plus_1);
    out.second = second_stage(samples, out.plan, m);
    return out;
}

}  // namespace shapefit

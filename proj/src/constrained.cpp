#include "shapefit/constrained.hpp"

#include "shapefit/parallel.hpp"
#include "shapefit/quadrature.hpp"
#include "nnls_internal.hpp"
#include "spline_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace shapefit {

namespace detail {
SplineModel make_spline_model(std::shared_ptr<const SplineCore>, SplineCore::Solution, double);
}

int ConePartition::sign_at(double t) const {
    const auto it = std::upper_bound(change_points.begin(), change_points.end(), t);
    const auto flips = static_cast<int>(it - change_points.begin());
    return (flips % 2 == 0) ? leading_sign : -leading_sign;
}

void ConePartition::validate() const {
    if (ell < 1) throw std::invalid_argument("ConePartition: ell must be >= 1");
    if (leading_sign != 1 && leading_sign != -1)
        throw std::invalid_argument("ConePartition: leading_sign must be +1 or -1");
    double prev = 0.0;
    for (double x : change_points) {
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument("ConePartition: change points must lie in [0,1]");
        if (x < prev) throw std::invalid_argument("ConePartition: change points must be sorted");
        prev = x;
    }
}

std::vector<double> constraint_grid(int n, int requested) {
    const int g = requested > 0
                      ? requested
                      : std::max(200, static_cast<int>(std::ceil(10.0 * std::sqrt(double(n)))));
    std::vector<double> grid(g);
    for (int i = 0; i < g; ++i) grid[i] = static_cast<double>(i) / (g - 1);
    return grid;
}

namespace {

using detail::SplineCore;

struct Workspace {
    std::shared_ptr<const SplineCore> core;
    std::shared_ptr<const BandLDLT> fact;      // of M(lambda)
    double lambda = 0.0;
    Eigen::VectorXd target;                    // -Ltilde^{-1} rhs
    std::vector<double> unconstrained;         // coefficient vector
    double vp_unconstrained = 0.0;

    // Whitened columns for one derivative order, built on demand.
    struct DerivBlock {
        Eigen::MatrixXd E;                     // ncoef x ngrid
        Eigen::MatrixXd raw_rows;              // ngrid x ncoef (unit-normalized)
        std::vector<double> row_norm;
        std::vector<double> uncon_values;      // normalized-row values at the unconstrained fit
    };
    std::vector<double> grid;
    std::map<int, DerivBlock> blocks;

    const DerivBlock& block(int deriv) {
        auto it = blocks.find(deriv);
        if (it != blocks.end()) return it->second;
        DerivBlock b;
        const int nb = core->basis.num_basis();
        const int g = static_cast<int>(grid.size());
        b.E.resize(nb, g);
        b.raw_rows.resize(g, nb);
        b.row_norm.resize(g);
        b.uncon_values.resize(g);
        for (int r = 0; r < g; ++r) {
            std::vector<double> row = core->basis.derivative_row(grid[r], deriv);
            double nrm = 0.0;
            for (double v : row) nrm += v * v;
            nrm = std::sqrt(nrm);
            if (!(nrm > 0.0)) nrm = 1.0;
            b.row_norm[r] = nrm;
            double uval = 0.0;
            for (int j = 0; j < nb; ++j) {
                const double v = row[j] / nrm;
                b.raw_rows(r, j) = v;
                b.E(j, r) = v;
                uval += v * unconstrained[j];
            }
            fact->half_solve_in_place(
                std::span<double>(b.E.col(r).data(), static_cast<std::size_t>(nb)));
            b.uncon_values[r] = uval;
        }
        return blocks.emplace(deriv, std::move(b)).first->second;
    }
};

Workspace make_workspace(const SampleSet& samples, int m, double lambda,
                         const ConstrainOptions& opts) {
    Workspace ws;
    ws.core = SplineCore::build(samples, m);
    ws.lambda = lambda;
    auto sol = ws.core->solve(lambda, false);
    ws.fact = sol.factorization;
    ws.unconstrained = sol.coef;
    double quad = 0.0;
    {
        Eigen::VectorXd t(ws.core->basis.num_basis());
        for (int j = 0; j < t.size(); ++j) t[j] = ws.core->btwy[j];
        std::vector<double> half(ws.core->btwy);
        ws.fact->half_solve_in_place(half);
        ws.target.resize(t.size());
        for (int j = 0; j < t.size(); ++j) ws.target[j] = -half[j];
        for (double v : half) quad += v * v;
    }
    ws.vp_unconstrained = ws.core->ytwy - quad;
    ws.grid = constraint_grid(samples.size(), opts.grid_points);
    return ws;
}

struct ConstraintSpec {
    int column = 0;  // index into grid
    int deriv = 0;
    int sign = +1;
};

ConstrainedFit solve_constrained(Workspace& ws, const std::vector<ConstraintSpec>& cons,
                                 const ConstrainOptions& opts,
                                 const std::vector<double>* warm_multipliers) {
    const int nb = ws.core->basis.num_basis();
    const int ncon = static_cast<int>(cons.size());

    auto problem = std::make_shared<ConstrainedProblem>();
    problem->ytwy = ws.core->ytwy;
    problem->target = ws.target;
    problem->E.resize(nb, ncon);
    problem->grid.resize(ncon);
    problem->deriv.resize(ncon);
    problem->sign.resize(ncon);
    problem->row_norm.resize(ncon);
    for (int r = 0; r < ncon; ++r) {
        const auto& blk = ws.block(cons[r].deriv);
        problem->E.col(r) = cons[r].sign * blk.E.col(cons[r].column);
        problem->grid[r] = ws.grid[cons[r].column];
        problem->deriv[r] = cons[r].deriv;
        problem->sign[r] = cons[r].sign;
        problem->row_norm[r] = blk.row_norm[cons[r].column];
    }

    Eigen::VectorXd warm;
    const Eigen::VectorXd* warm_ptr = nullptr;
    if (warm_multipliers) {
        if (static_cast<int>(warm_multipliers->size()) != ncon)
            throw std::invalid_argument("warm start: multiplier count mismatch");
        warm.resize(ncon);
        for (int r = 0; r < ncon; ++r)
            warm[r] = std::max(0.0, 0.5 * (*warm_multipliers)[r] * problem->row_norm[r]);
        warm_ptr = &warm;
    }

    const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : -1;
    auto nnls = detail::nnls_solve(problem->E, problem->target, nullptr, warm_ptr, -1.0, max_iter);
    if (!nnls.converged)
        throw std::runtime_error("fit_constrained: QP iteration limit reached");

    // Recover the primal coefficients: c = M^{-1}(rhs + sum beta_r ghat_r).
    std::vector<double> v(ws.core->btwy);
    for (int r = 0; r < ncon; ++r) {
        const double b = nnls.x[r];
        if (b == 0.0) continue;
        const auto& blk = ws.block(cons[r].deriv);
        for (int j = 0; j < nb; ++j)
            v[j] += b * cons[r].sign * blk.raw_rows(cons[r].column, j);
    }
    ws.fact->solve_in_place(v);

    SplineCore::Solution sol;
    sol.coef = std::move(v);
    sol.factorization = ws.fact;
    sol.hat_trace = std::numeric_limits<double>::quiet_NaN();

    ConstrainedFit fit;
    fit.model = detail::make_spline_model(ws.core, std::move(sol), ws.lambda);
    fit.primal_value = fit.model.objective();
    const double resid2 = (problem->E * nnls.x - problem->target).squaredNorm();
    fit.dual_value = resid2 - ws.core->ytwy;
    fit.duality_gap = fit.primal_value + fit.dual_value;
    fit.iterations = nnls.iterations;

    fit.multipliers.resize(ncon);
    fit.active_count = 0;
    double worst = std::numeric_limits<double>::infinity();
    Eigen::VectorXd stat(nb);
    {
        // Stationarity: 2(Mc - rhs) - G' alpha = 0.
        const SymBand msys = ws.core->system_matrix(ws.lambda);
        const auto mc = msys.multiply(fit.model.coefficients());
        for (int j = 0; j < nb; ++j) stat[j] = 2.0 * (mc[j] - ws.core->btwy[j]);
    }
    for (int r = 0; r < ncon; ++r) {
        const double beta = nnls.x[r];
        fit.multipliers[r] = 2.0 * beta / problem->row_norm[r];
        if (beta > 0.0) ++fit.active_count;
        const auto& blk = ws.block(cons[r].deriv);
        double val = 0.0;
        for (int j = 0; j < nb; ++j) val += blk.raw_rows(cons[r].column, j) * fit.model.coefficients()[j];
        val *= cons[r].sign;
        worst = std::min(worst, val);
        const double alpha_hat = 2.0 * beta;  // multiplier in the normalized-row scale
        if (alpha_hat != 0.0)
            for (int j = 0; j < nb; ++j)
                stat[j] -= alpha_hat * cons[r].sign * blk.raw_rows(cons[r].column, j);
    }
    fit.max_violation = (ncon == 0) ? 0.0 : worst;
    fit.kkt_residual = ncon == 0 ? 0.0 : stat.cwiseAbs().maxCoeff();
    fit.problem = std::move(problem);
    return fit;
}

std::vector<ConstraintSpec> partition_constraints(const Workspace& ws,
                                                  const ConePartition& partition) {
    std::vector<ConstraintSpec> cons(ws.grid.size());
    for (std::size_t i = 0; i < ws.grid.size(); ++i)
        cons[i] = {static_cast<int>(i), partition.ell, partition.sign_at(ws.grid[i])};
    return cons;
}

void check_partition_inputs(const SampleSet&, int m, const ConePartition& partition) {
    partition.validate();
    if (m < partition.ell)
        throw std::invalid_argument("fit_constrained: needs m >= ell");
}

}  // namespace

ConstrainedFit fit_constrained(const SampleSet& samples, int m, double lambda,
                               const ConePartition& partition, const ConstrainOptions& opts) {
    check_partition_inputs(samples, m, partition);
    Workspace ws = make_workspace(samples, m, lambda, opts);
    auto fit = solve_constrained(ws, partition_constraints(ws, partition), opts, nullptr);
    fit.partition = partition;
    return fit;
}

ConstrainedFit fit_constrained_warm(const SampleSet& samples, int m, double lambda,
                                    const ConePartition& partition,
                                    const std::vector<double>& warm_multipliers,
                                    const ConstrainOptions& opts) {
    check_partition_inputs(samples, m, partition);
    Workspace ws = make_workspace(samples, m, lambda, opts);
    auto fit = solve_constrained(ws, partition_constraints(ws, partition), opts, &warm_multipliers);
    fit.partition = partition;
    return fit;
}

ConstrainedFit fit_with_constraints(const SampleSet& samples, int m, double lambda,
                                    const std::vector<RegionConstraint>& regions,
                                    const ConstrainOptions& opts) {
    Workspace ws = make_workspace(samples, m, lambda, opts);
    std::vector<ConstraintSpec> cons;
    for (const auto& reg : regions) {
        if (reg.sign != 1 && reg.sign != -1)
            throw std::invalid_argument("fit_with_constraints: sign must be +1 or -1");
        if (reg.derivative < 0 || reg.derivative >= 2 * m)
            throw std::invalid_argument("fit_with_constraints: derivative order out of range");
        if (!(reg.lo <= reg.hi))
            throw std::invalid_argument("fit_with_constraints: empty region");
    }
    for (std::size_t i = 0; i < ws.grid.size(); ++i) {
        const double g = ws.grid[i];
        for (const auto& reg : regions) {
            const bool inside = (g >= reg.lo) && (g < reg.hi || (reg.hi >= 1.0 && g <= reg.hi));
            if (inside) {
                cons.push_back({static_cast<int>(i), reg.derivative, reg.sign});
                break;  // regions are disjoint; first match wins
            }
        }
    }
    return solve_constrained(ws, cons, opts, nullptr);
}

double dual_value(const ConstrainedFit& fit) { return fit.dual_value; }

std::pair<ConePartition, ConstrainedFit> optimize_changepoints(const SampleSet& samples, int m,
                                                               double lambda, int ell, int k,
                                                               int grid_resolution,
                                                               const ConstrainOptions& opts) {
    if (k < 0) throw std::invalid_argument("optimize_changepoints: k must be >= 0");
    if (grid_resolution < 2)
        throw std::invalid_argument("optimize_changepoints: grid resolution must be >= 2");
    ConePartition probe;
    probe.ell = ell;
    check_partition_inputs(samples, m, probe);

    Workspace ws = make_workspace(samples, m, lambda, opts);
    const auto& blk = ws.block(ell);
    const int g = static_cast<int>(ws.grid.size());

    std::vector<double> locations(grid_resolution);
    for (int i = 0; i < grid_resolution; ++i)
        locations[i] = static_cast<double>(i) / (grid_resolution - 1);

    struct Candidate {
        std::vector<double> x;
        int sign;
    };
    std::vector<Candidate> candidates;
    std::vector<double> tuple(k);
    // Nondecreasing tuples in lexicographic order.
    std::function<void(int, int)> emit = [&](int pos, int start) {
        if (pos == k) {
            for (int s : {+1, -1}) candidates.push_back({tuple, s});
            return;
        }
        for (int i = start; i < grid_resolution; ++i) {
            tuple[pos] = locations[i];
            emit(pos + 1, i);
        }
    };
    emit(0, 0);

    const double feas_tol = opts.feasibility_tol;
    std::vector<double> objective(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), [&](int c) {
        ConePartition part;
        part.ell = ell;
        part.change_points = candidates[c].x;
        part.leading_sign = candidates[c].sign;
        std::vector<int> signs(g);
        bool feasible_already = true;
        for (int r = 0; r < g; ++r) {
            signs[r] = part.sign_at(ws.grid[r]);
            if (signs[r] * blk.uncon_values[r] < -feas_tol) feasible_already = false;
        }
        if (feasible_already) {
            objective[c] = ws.vp_unconstrained;
            return;
        }
        auto nnls = detail::nnls_solve(blk.E, ws.target, &signs, nullptr, -1.0,
                                       opts.max_iterations > 0 ? opts.max_iterations : -1);
        const double resid2 = [&] {
            Eigen::VectorXd r = -ws.target;
            for (int col = 0; col < g; ++col)
                if (nnls.x[col] != 0.0) r += nnls.x[col] * signs[col] * blk.E.col(col);
            return r.squaredNorm();
        }();
        objective[c] = ws.core->ytwy - resid2;
    });

    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (objective[c] < objective[best]) best = c;

    ConePartition winner;
    winner.ell = ell;
    winner.change_points = candidates[best].x;
    winner.leading_sign = candidates[best].sign;
    auto fit = solve_constrained(ws, partition_constraints(ws, winner), opts, nullptr);
    fit.partition = winner;
    return {winner, std::move(fit)};
}

double v_norm(const std::function<double(double, int)>& curve, const SampleSet& samples, int m,
              double lambda) {
    const auto grid = constraint_grid(samples.size());
    const auto panels = merge_breakpoints(samples.design.points, grid, 0.0, 1.0);
    const double penalty = integrate_panels(
        [&](double s) {
            const double v = curve(s, m);
            return v * v;
        },
        panels);
    double data = 0.0;
    const int n = samples.size();
    for (int i = 0; i < n; ++i) {
        const double v = curve(samples.design.points[i], 0);
        data += v * v / (n * samples.sigma[i] * samples.sigma[i]);
    }
    return 0.5 * lambda * penalty + data;
}

bool cone_membership(const std::function<double(double, int)>& curve,
                     const ConePartition& partition, double tol, int grid_points) {
    partition.validate();
    const auto grid = constraint_grid(200, grid_points);
    for (double g : grid)
        if (partition.sign_at(g) * curve(g, partition.ell) < -tol) return false;
    return true;
}

}  // namespace shapefit

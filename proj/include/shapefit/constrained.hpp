#pragma once

#include "shapefit/design.hpp"
#include "shapefit/spline.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace shapefit {

/// Sign pattern of f^(ell) across ordered change points: leading_sign on
/// [0, x_1), flipping at every change point. Coincident points cancel.
struct ConePartition {
    int ell = 1;
    std::vector<double> change_points;  // sorted, in [0, 1]
    int leading_sign = +1;

    int k() const { return static_cast<int>(change_points.size()); }
    int sign_at(double t) const;
    void validate() const;
};

struct RegionConstraint {
    double lo = 0.0, hi = 1.0;
    int derivative = 0;
    int sign = +1;  // sign * f^(derivative) >= 0 on [lo, hi)
};

/// The discretized sign-constrained problem in whitened form
///   min ||E b - target||^2 over b >= 0,
/// kept on the fit so an independent solver can replay the dual.
struct ConstrainedProblem {
    Eigen::MatrixXd E;
    Eigen::VectorXd target;
    std::vector<double> grid;      // constraint location per column
    std::vector<int> deriv;
    std::vector<int> sign;
    std::vector<double> row_norm;  // norms of the raw constraint rows
    double ytwy = 0.0;
};

struct ConstrainedFit {
    SplineModel model;
    std::optional<ConePartition> partition;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double duality_gap = 0.0;
    double kkt_residual = 0.0;       // stationarity residual, sup norm
    double max_violation = 0.0;      // worst signed constraint value (>= 0 when feasible)
    std::vector<double> multipliers; // raw-row scale, one per constraint column
    int active_count = 0;
    int iterations = 0;
    std::shared_ptr<const ConstrainedProblem> problem;
};

struct ConstrainOptions {
    int grid_points = 0;       // 0: max(200, ceil(10 sqrt(n)))
    double feasibility_tol = 1e-8;
    int max_iterations = 0;    // 0: solver default
};

ConstrainedFit fit_constrained(const SampleSet& samples, int m, double lambda,
                               const ConePartition& partition, const ConstrainOptions& = {});

ConstrainedFit fit_with_constraints(const SampleSet& samples, int m, double lambda,
                                    const std::vector<RegionConstraint>& regions,
                                    const ConstrainOptions& = {});

/// Same solve warm-started from a feasible multiplier vector (testing hook
/// for the uniqueness property).
ConstrainedFit fit_constrained_warm(const SampleSet& samples, int m, double lambda,
                                    const ConePartition& partition,
                                    const std::vector<double>& warm_multipliers,
                                    const ConstrainOptions& = {});

double dual_value(const ConstrainedFit& fit);

/// Exhaustive ordered-tuple search for the change points minimizing the
/// constrained objective; both leading signs are searched. Ties break toward
/// the lexicographically smallest tuple, then positive leading sign.
std::pair<ConePartition, ConstrainedFit> optimize_changepoints(
    const SampleSet& samples, int m, double lambda, int ell, int k, int grid_resolution = 41,
    const ConstrainOptions& = {});

/// (lambda/2) int |curve^(m)|^2 + (1/n) sum curve(t_i)^2 / sigma_i^2.
double v_norm(const std::function<double(double, int)>& curve, const SampleSet& samples, int m,
              double lambda);

bool cone_membership(const std::function<double(double, int)>& curve,
                     const ConePartition& partition, double tol, int grid_points = 0);

/// Uniform constraint grid used by the fits (exposed for tests/reports).
std::vector<double> constraint_grid(int n, int requested = 0);

}  // namespace shapefit

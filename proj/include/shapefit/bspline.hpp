#pragma once

#include <vector>

namespace shapefit {

/// Clamped B-spline basis on a strictly increasing site vector: boundary
/// sites carry full multiplicity, interior sites are simple knots.
class BSplineBasis {
public:
    BSplineBasis(const std::vector<double>& sites, int order);

    int order() const { return order_; }
    int degree() const { return order_ - 1; }
    int num_basis() const { return num_basis_; }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& sites() const { return sites_; }

    /// Values and derivatives of the `order()` basis functions supported at x.
    /// `out` receives (nd+1) rows of order() entries (row-major); derivatives
    /// above the degree are zero. Returns the index of the first function.
    int eval(double x, int nd, double* out) const;

    /// Convenience: a dense coefficient-space row for the deriv-th derivative at x.
    std::vector<double> derivative_row(double x, int deriv) const;

private:
    int order_;
    int num_basis_;
    std::vector<double> sites_;
    std::vector<double> knots_;

    int find_span(double x) const;
};

}  // namespace shapefit

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace shapefit::detail {

struct NnlsResult {
    Eigen::VectorXd x;       // >= 0
    int iterations = 0;
    bool converged = false;
    double max_gradient = 0.0;  // max over zero coordinates of -grad
};

/// Lawson-Hanson active-set solve of min ||E x - f|| over x >= 0.
/// col_sign optionally flips column j of E by col_sign[j] (+1/-1).
/// warm_start seeds the passive set with the support of a feasible x0.
NnlsResult nnls_solve(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                      const std::vector<int>* col_sign = nullptr,
                      const Eigen::VectorXd* warm_start = nullptr, double tol = -1.0,
                      int max_iter = -1);

}  // namespace shapefit::detail

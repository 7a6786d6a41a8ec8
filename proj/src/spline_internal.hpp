#pragma once

#include "shapefit/banded.hpp"
#include "shapefit/bspline.hpp"
#include "shapefit/design.hpp"

#include <memory>
#include <span>
#include <vector>

namespace shapefit::detail {

/// Lambda-independent pieces of the penalized least-squares problem
///   (lambda/2) c' Omega c + (y - Bc)' W (y - Bc),  W = diag(1/(n sigma_i^2)).
struct SplineCore {
    SampleSet samples;
    int m = 0;
    BSplineBasis basis;
    SymBand omega;                  // int B_i^(m) B_j^(m)
    SymBand btwb;
    std::vector<double> btwy;
    std::vector<double> w;
    double ytwy = 0.0;
    std::vector<double> data_rows;  // n rows of order() basis values
    std::vector<int> data_first;

    static std::shared_ptr<const SplineCore> build(const SampleSet& samples, int m);

    /// Fitted value at design point i for coefficient vector c.
    double row_dot(int i, std::span<const double> c) const;

    struct Solution {
        std::vector<double> coef;
        std::shared_ptr<const BandLDLT> factorization;  // of M(lambda)
        double hat_trace = 0.0;
    };
    SymBand system_matrix(double lambda) const;  // M = (lambda/2) Omega + B'WB
    Solution solve(double lambda, bool need_trace) const;

private:
    SplineCore(const SampleSet& s, int m_, BSplineBasis b)
        : samples(s), m(m_), basis(std::move(b)),
          omega(basis.num_basis(), basis.order() - 1),
          btwb(basis.num_basis(), basis.order() - 1) {}
};

}  // namespace shapefit::detail

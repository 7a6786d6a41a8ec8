#include "shapefit/bspline.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace shapefit {

BSplineBasis::BSplineBasis(const std::vector<double>& sites, int order)
    : order_(order), sites_(sites) {
    if (order < 2) throw std::invalid_argument("BSplineBasis: order must be >= 2");
    if (sites.size() < 2) throw std::invalid_argument("BSplineBasis: needs at least two sites");
    for (std::size_t i = 1; i < sites.size(); ++i)
        if (!(sites[i] > sites[i - 1]))
            throw std::invalid_argument("BSplineBasis: sites must be strictly increasing");

    const int n = static_cast<int>(sites.size());
    knots_.reserve(2 * order + n - 2);
    for (int i = 0; i < order; ++i) knots_.push_back(sites.front());
    for (int i = 1; i + 1 < n; ++i) knots_.push_back(sites[i]);
    for (int i = 0; i < order; ++i) knots_.push_back(sites.back());
    num_basis_ = static_cast<int>(knots_.size()) - order;
}

int BSplineBasis::find_span(double x) const {
    const int p = degree();
    const int hi_span = num_basis_ - 1;
    if (x >= knots_[hi_span + 1]) return hi_span;
    if (x <= knots_[p]) return p;
    const auto it = std::upper_bound(knots_.begin() + p, knots_.begin() + hi_span + 1, x);
    return static_cast<int>(it - knots_.begin()) - 1;
}

int BSplineBasis::eval(double x, int nd, double* out) const {
    const int p = degree();
    const int span = find_span(x);
    const int k = order_;

    // Knot-difference triangle (NURBS book A2.3 layout).
    std::vector<double> ndu(static_cast<std::size_t>(k) * k);
    std::vector<double> left(k), right(k);
    auto NDU = [&](int i, int j) -> double& { return ndu[static_cast<std::size_t>(i) * k + j]; };

    NDU(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            NDU(j, r) = right[r + 1] + left[j - r];
            const double temp = NDU(r, j - 1) / NDU(j, r);
            NDU(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        NDU(j, j) = saved;
    }

    std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(nd + 1) * k);
    for (int j = 0; j <= p; ++j) out[j] = NDU(j, p);

    const int max_d = std::min(nd, p);
    std::vector<double> a(static_cast<std::size_t>(2) * k);
    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * k + j]; };

    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        A(0, 0) = 1.0;
        for (int d = 1; d <= max_d; ++d) {
            double der = 0.0;
            const int rk = r - d;
            const int pk = p - d;
            if (r >= d) {
                A(s2, 0) = A(s1, 0) / NDU(pk + 1, rk);
                der = A(s2, 0) * NDU(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? d - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                A(s2, j) = (A(s1, j) - A(s1, j - 1)) / NDU(pk + 1, rk + j);
                der += A(s2, j) * NDU(rk + j, pk);
            }
            if (r <= pk) {
                A(s2, d) = -A(s1, d - 1) / NDU(pk + 1, r);
                der += A(s2, d) * NDU(r, pk);
            }
            out[static_cast<std::size_t>(d) * k + r] = der;
            std::swap(s1, s2);
        }
    }

    double factor = static_cast<double>(p);
    for (int d = 1; d <= max_d; ++d) {
        for (int r = 0; r <= p; ++r) out[static_cast<std::size_t>(d) * k + r] *= factor;
        factor *= static_cast<double>(p - d);
    }
    return span - p;
}

std::vector<double> BSplineBasis::derivative_row(double x, int deriv) const {
    std::vector<double> local(static_cast<std::size_t>(deriv + 1) * order_);
    const int first = eval(x, deriv, local.data());
    std::vector<double> row(num_basis_, 0.0);
    for (int j = 0; j < order_; ++j)
        row[first + j] = local[static_cast<std::size_t>(deriv) * order_ + j];
    return row;
}

}  // namespace shapefit

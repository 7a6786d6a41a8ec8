#include "shapefit/banded.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace shapefit {

double& SymBand::at(int i, int j) {
    assert(i >= j && i - j <= bw_ && j >= 0 && i < n_);
    return a_[static_cast<std::size_t>(i - j) * n_ + j];
}

double SymBand::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return a_[static_cast<std::size_t>(i - j) * n_ + j];
}

void SymBand::add(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    at(i, j) += v;
}

void SymBand::set_zero() { std::fill(a_.begin(), a_.end(), 0.0); }

SymBand SymBand::combine(double a, const SymBand& x, double b, const SymBand& y) {
    assert(x.n_ == y.n_ && x.bw_ == y.bw_);
    SymBand out(x.n_, x.bw_);
    for (std::size_t k = 0; k < out.a_.size(); ++k) out.a_[k] = a * x.a_[k] + b * y.a_[k];
    return out;
}

std::vector<double> SymBand::multiply(std::span<const double> x) const {
    assert(static_cast<int>(x.size()) == n_);
    std::vector<double> y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        y[j] += a_[j] * x[j];
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) {
            const double v = a_[static_cast<std::size_t>(i - j) * n_ + j];
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }
    return y;
}

void BandLDLT::factorize(const SymBand& a) {
    n_ = a.n_;
    bw_ = a.bw_;
    l_.assign(a.a_.begin(), a.a_.end());
    d_.assign(n_, 0.0);
    min_pivot_ = std::numeric_limits<double>::infinity();

    auto lref = [&](int i, int j) -> double& {
        return l_[static_cast<std::size_t>(i - j) * n_ + j];
    };

    for (int j = 0; j < n_; ++j) {
        double dj = lref(j, j);
        const int kmin = std::max(0, j - bw_);
        for (int k = kmin; k < j; ++k) {
            const double ljk = lref(j, k);
            dj -= ljk * ljk * d_[k];
        }
        if (!(dj > 0.0)) throw std::runtime_error("BandLDLT: matrix is not positive definite");
        d_[j] = dj;
        min_pivot_ = std::min(min_pivot_, dj);
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) {
            double v = lref(i, j);
            const int k0 = std::max(0, i - bw_);
            for (int k = std::max(k0, kmin); k < j; ++k) v -= lref(i, k) * lref(j, k) * d_[k];
            lref(i, j) = v / dj;
        }
        lref(j, j) = 1.0;
    }
}

void BandLDLT::solve_in_place(std::span<double> b) const {
    assert(static_cast<int>(b.size()) == n_);
    for (int j = 0; j < n_; ++j) {
        const double bj = b[j];
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) b[i] -= lval(i, j) * bj;
    }
    for (int j = 0; j < n_; ++j) b[j] /= d_[j];
    for (int j = n_ - 1; j >= 0; --j) {
        double s = b[j];
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) s -= lval(i, j) * b[i];
        b[j] = s;
    }
}

std::vector<double> BandLDLT::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

void BandLDLT::half_solve_in_place(std::span<double> b) const {
    assert(static_cast<int>(b.size()) == n_);
    for (int j = 0; j < n_; ++j) {
        const double bj = b[j];
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = j + 1; i <= imax; ++i) b[i] -= lval(i, j) * bj;
    }
    for (int j = 0; j < n_; ++j) b[j] /= std::sqrt(d_[j]);
}

SymBand BandLDLT::inverse_band() const {
    SymBand z(n_, bw_);
    for (int j = n_ - 1; j >= 0; --j) {
        const int imax = std::min(n_ - 1, j + bw_);
        for (int i = imax; i >= j; --i) {
            double v = (i == j) ? 1.0 / d_[j] : 0.0;
            const int kmax = std::min(n_ - 1, j + bw_);
            for (int k = j + 1; k <= kmax; ++k) {
                const double ljk = lval(k, j);
                if (ljk != 0.0) v -= ljk * z.get(k, i);
            }
            z.at(i, j) = v;
        }
    }
    return z;
}

}  // namespace shapefit

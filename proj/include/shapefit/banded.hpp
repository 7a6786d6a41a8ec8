#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shapefit {

/// Symmetric band matrix, lower band stored by diagonals:
/// entry (j + d, j) for 0 <= d <= bandwidth lives at diag(d)[j].
class SymBand {
public:
    SymBand() = default;
    SymBand(int n, int bandwidth)
        : n_(n), bw_(bandwidth), a_(static_cast<std::size_t>(bandwidth + 1) * n, 0.0) {}

    int size() const { return n_; }
    int bandwidth() const { return bw_; }

    double& at(int i, int j);            // requires i >= j, i - j <= bandwidth
    double get(int i, int j) const;      // 0 outside the band, symmetric access
    void add(int i, int j, double v);    // symmetric accumulate

    void set_zero();
    /// this := a*x + b*y over matching layouts.
    static SymBand combine(double a, const SymBand& x, double b, const SymBand& y);

    std::vector<double> multiply(std::span<const double> x) const;

    const std::vector<double>& raw() const { return a_; }

private:
    int n_ = 0;
    int bw_ = 0;
    std::vector<double> a_;

    friend class BandLDLT;
};

/// LDL^T factorization of a symmetric positive definite band matrix.
class BandLDLT {
public:
    BandLDLT() = default;
    explicit BandLDLT(const SymBand& a) { factorize(a); }

    void factorize(const SymBand& a);

    int size() const { return n_; }

    /// x := A^{-1} b
    void solve_in_place(std::span<double> b) const;
    std::vector<double> solve(std::span<const double> b) const;

    /// y := D^{-1/2} L^{-1} b, so that ||y||^2 = b^T A^{-1} b.
    void half_solve_in_place(std::span<double> b) const;

    /// Band of A^{-1} (same bandwidth), via the Takahashi recursions.
    SymBand inverse_band() const;

    double min_pivot() const { return min_pivot_; }

private:
    int n_ = 0;
    int bw_ = 0;
    std::vector<double> l_;   // unit lower band, diagonals like SymBand
    std::vector<double> d_;
    double min_pivot_ = 0.0;

    double lval(int i, int j) const {
        return l_[static_cast<std::size_t>(i - j) * n_ + j];
    }
};

}  // namespace shapefit

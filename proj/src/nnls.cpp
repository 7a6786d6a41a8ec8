#include "nnls_internal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace shapefit::detail {

namespace {

class PassiveSet {
public:
    explicit PassiveSet(const Eigen::MatrixXd& E, const std::vector<int>* col_sign)
        : E_(E), sign_(col_sign) {}

    int size() const { return static_cast<int>(cols_.size()); }
    int col(int p) const { return cols_[p]; }
    const Eigen::MatrixXd& matrix() const { return Ep_; }

    Eigen::VectorXd signed_col(int j) const {
        Eigen::VectorXd c = E_.col(j);
        if (sign_ && (*sign_)[j] < 0) c = -c;
        return c;
    }

    /// Tries to append column j, keeping the Cholesky factor of the Gram
    /// matrix.  Returns false when j is numerically dependent on the set.
    bool append(int j) {
        const Eigen::VectorXd e = signed_col(j);
        const double nrm2 = e.squaredNorm();
        const int p = size();
        Eigen::VectorXd r(p);
        if (p > 0) {
            const Eigen::VectorXd k = Ep_.leftCols(p).transpose() * e;
            r = R_.topLeftCorner(p, p).transpose().triangularView<Eigen::Lower>().solve(k);
        }
        const double d2 = nrm2 - (p > 0 ? r.squaredNorm() : 0.0);
        if (!(d2 > 1e-13 * std::max(nrm2, 1e-300))) return false;

        cols_.push_back(j);
        Ep_.conservativeResize(E_.rows(), p + 1);
        Ep_.col(p) = e;
        Eigen::MatrixXd Rnew = Eigen::MatrixXd::Zero(p + 1, p + 1);
        if (p > 0) {
            Rnew.topLeftCorner(p, p) = R_.topLeftCorner(p, p);
            Rnew.block(0, p, p, 1) = r;
        }
        Rnew(p, p) = std::sqrt(d2);
        R_ = std::move(Rnew);
        return true;
    }

    void remove(const std::vector<int>& positions) {
        std::vector<int> sorted(positions);
        std::sort(sorted.rbegin(), sorted.rend());
        for (int pos : sorted) {
            cols_.erase(cols_.begin() + pos);
            const int p = size();
            for (int c = pos; c < p; ++c) Ep_.col(c) = Ep_.col(c + 1);
            Ep_.conservativeResize(E_.rows(), p);
        }
        refactor();
    }

    /// Least-squares coefficients of f on the passive columns.
    Eigen::VectorXd solve(const Eigen::VectorXd& f) const {
        const int p = size();
        const Eigen::VectorXd b = Ep_.leftCols(p).transpose() * f;
        const Eigen::VectorXd y =
            R_.topLeftCorner(p, p).transpose().triangularView<Eigen::Lower>().solve(b);
        return R_.topLeftCorner(p, p).triangularView<Eigen::Upper>().solve(y);
    }

private:
    void refactor() {
        const int p = size();
        if (p == 0) {
            R_.resize(0, 0);
            return;
        }
        Eigen::MatrixXd gram = Ep_.leftCols(p).transpose() * Ep_.leftCols(p);
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) {
            gram.diagonal().array() += 1e-12 * gram.diagonal().maxCoeff();
            llt.compute(gram);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("nnls: passive set lost positive definiteness");
        }
        R_ = llt.matrixU();
    }

    const Eigen::MatrixXd& E_;
    const std::vector<int>* sign_;
    std::vector<int> cols_;
    Eigen::MatrixXd Ep_;
    Eigen::MatrixXd R_;
};

}  // namespace

NnlsResult nnls_solve(const Eigen::MatrixXd& E, const Eigen::VectorXd& f,
                      const std::vector<int>* col_sign, const Eigen::VectorXd* warm_start,
                      double tol, int max_iter) {
    const int ncols = static_cast<int>(E.cols());
    NnlsResult out;
    out.x = Eigen::VectorXd::Zero(ncols);
    if (max_iter < 0) max_iter = 5 * ncols + 100;

    PassiveSet passive(E, col_sign);
    std::vector<char> in_passive(ncols, 0);
    auto gradient = [&](const Eigen::VectorXd& resid) {
        Eigen::VectorXd w = E.transpose() * resid;
        if (col_sign)
            for (int j = 0; j < ncols; ++j)
                if ((*col_sign)[j] < 0) w[j] = -w[j];
        return w;
    };

    Eigen::VectorXd resid = f;
    Eigen::VectorXd w = gradient(resid);
    const double w_scale = std::max(1e-300, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
    const double tol_w = (tol > 0.0) ? tol : 1e-10 * std::max(1.0, w_scale);

    auto run_inner = [&]() {
        // Restore x >= 0 on the passive set, dropping bound-hitting columns.
        while (passive.size() > 0) {
            Eigen::VectorXd z = passive.solve(f);
            bool all_pos = true;
            for (int p = 0; p < passive.size(); ++p)
                if (z[p] <= 0.0) all_pos = false;
            if (all_pos) {
                for (int p = 0; p < passive.size(); ++p) out.x[passive.col(p)] = z[p];
                return;
            }
            double theta = std::numeric_limits<double>::infinity();
            for (int p = 0; p < passive.size(); ++p) {
                if (z[p] <= 0.0) {
                    const double xp = out.x[passive.col(p)];
                    theta = std::min(theta, xp / (xp - z[p]));
                }
            }
            theta = std::clamp(theta, 0.0, 1.0);
            std::vector<int> drop;
            for (int p = 0; p < passive.size(); ++p) {
                const int j = passive.col(p);
                out.x[j] += theta * (z[p] - out.x[j]);
                if (z[p] <= 0.0 && out.x[j] <= 1e-14 * w_scale + 1e-300) {
                    out.x[j] = 0.0;
                    drop.push_back(p);
                }
            }
            if (drop.empty()) {
                // Numerical stalemate: drop the most negative coordinate.
                int worst = 0;
                for (int p = 1; p < passive.size(); ++p)
                    if (z[p] < z[worst]) worst = p;
                out.x[passive.col(worst)] = 0.0;
                drop.push_back(worst);
            }
            for (int p : drop) in_passive[passive.col(p)] = 0;
            passive.remove(drop);
        }
    };

    if (warm_start) {
        for (int j = 0; j < ncols; ++j) {
            if ((*warm_start)[j] > 0.0 && passive.append(j)) {
                in_passive[j] = 1;
                out.x[j] = (*warm_start)[j];
            }
        }
        run_inner();
        resid = f;
        if (passive.size() > 0)
            resid -= passive.matrix() * passive.solve(f);
        w = gradient(resid);
    }

    std::vector<char> rejected(ncols, 0);
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        int jbest = -1;
        double wbest = tol_w;
        for (int j = 0; j < ncols; ++j) {
            if (in_passive[j] || rejected[j]) continue;
            if (w[j] > wbest) {
                wbest = w[j];
                jbest = j;
            }
        }
        if (jbest < 0) {
            out.converged = true;
            break;
        }
        if (!passive.append(jbest)) {
            rejected[jbest] = 1;  // numerically dependent; gradient is noise
            continue;
        }
        in_passive[jbest] = 1;
        run_inner();
        resid = f;
        if (passive.size() > 0) {
            const Eigen::VectorXd z = passive.solve(f);
            resid -= passive.matrix() * z;
        }
        w = gradient(resid);
        std::fill(rejected.begin(), rejected.end(), 0);
    }

    out.max_gradient = 0.0;
    for (int j = 0; j < ncols; ++j)
        if (!in_passive[j]) out.max_gradient = std::max(out.max_gradient, w[j]);
    return out;
}

}  // namespace shapefit::detail

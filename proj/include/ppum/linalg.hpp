#ifndef PPUM_LINALG_HPP
#define PPUM_LINALG_HPP

// Row-compressed sparse matrices and a deterministic preconditioned conjugate
// gradient solver with a symmetric Gauss-Seidel preconditioner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ppum/errors.hpp"

namespace ppum {

class CsrMatrix {
public:
    CsrMatrix() = default;

    // pattern entries must be unique; they are sorted row-major internally
    CsrMatrix(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> pattern) : n_(n) {
        std::sort(pattern.begin(), pattern.end());
        pattern.erase(std::unique(pattern.begin(), pattern.end()), pattern.end());
        row_ptr_.assign(n + 1, 0);
        col_.reserve(pattern.size());
        for (const auto& [i, j] : pattern) {
            ++row_ptr_[i + 1];
            col_.push_back(j);
        }
        for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
        val_.assign(col_.size(), 0.0);
    }

    std::size_t rows() const { return n_; }
    std::size_t nnz() const { return col_.size(); }

    void set_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

    void add(std::size_t i, std::size_t j, double v) {
        const auto b = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto e = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(b, e, j);
        if (it == e || *it != j) throw Error("CsrMatrix::add: entry outside pattern");
        val_[static_cast<std::size_t>(it - col_.begin())] += v;
    }

    double get(std::size_t i, std::size_t j) const {
        const auto b = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto e = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(b, e, j);
        return (it == e || *it != j) ? 0.0 : val_[static_cast<std::size_t>(it - col_.begin())];
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
            y[i] = s;
        }
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        std::vector<double> y;
        multiply(x, y);
        return y;
    }

    CsrMatrix transpose() const {
        std::vector<std::pair<std::size_t, std::size_t>> pat;
        pat.reserve(nnz());
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) pat.emplace_back(col_[k], i);
        CsrMatrix t(n_, pat);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.add(col_[k], i, val_[k]);
        return t;
    }

    double max_asymmetry() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                m = std::max(m, std::abs(val_[k] - get(col_[k], i)));
        return m;
    }

    // symmetric Gauss-Seidel application: z = (D+U)^{-1} D (D+L)^{-1} r
    void sgs_apply(const std::vector<double>& r, std::vector<double>& z) const {
        std::vector<double>& y = sgs_tmp_;
        y.assign(n_, 0.0);
        // forward solve (D+L) y = r
        for (std::size_t i = 0; i < n_; ++i) {
            double s = r[i];
            double d = 0.0;
            for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
                if (col_[k] < i) s -= val_[k] * y[col_[k]];
                else if (col_[k] == i) d = val_[k];
            }
            if (d == 0.0) throw NotSpd("sgs: zero diagonal");
            y[i] = s / d;
        }
        // backward solve (D+U) z = D y
        z.assign(n_, 0.0);
        for (std::size_t ii = n_; ii-- > 0;) {
            double d = 0.0;
            double s = 0.0;
            for (std::size_t k = row_ptr_[ii]; k < row_ptr_[ii + 1]; ++k) {
                if (col_[k] > ii) s -= val_[k] * z[col_[k]];
                else if (col_[k] == ii) d = val_[k];
            }
            z[ii] = (d * y[ii] + s) / d;
        }
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> val_;
    mutable std::vector<double> sgs_tmp_;
};

struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct LinearSolveResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double rel_residual = 0.0;
    bool converged = true;
};

// PCG with symmetric Gauss-Seidel preconditioning; zero initial guess, fixed
// summation order, relative residual stopping.
inline LinearSolveResult solve_linear(const SparseSystem& sys, double tol, std::size_t max_iter) {
    const CsrMatrix& A = sys.matrix;
    const std::size_t n = A.rows();
    LinearSolveResult out;
    out.x.assign(n, 0.0);
    if (n == 0) return out;

    const double nb = norm2(sys.rhs);
    if (nb == 0.0) return out;

    std::vector<double> r = sys.rhs; // r = b - A*0
    std::vector<double> z(n), p(n), q(n);
    A.sgs_apply(r, z);
    p = z;
    double rz = dot(r, z);
    double best_rel = norm2(r) / nb;
    std::vector<double> best_x = out.x;

    for (std::size_t it = 0; it < max_iter; ++it) {
        A.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw NotSpd("solve_linear: non-positive curvature, matrix not SPD");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) out.x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
        out.iterations = it + 1;
        const double rel = norm2(r) / nb;
        if (rel < best_rel) {
            best_rel = rel;
            best_x = out.x;
        }
        if (rel <= tol) {
            out.rel_residual = rel;
            return out;
        }
        A.sgs_apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    out.x = best_x;
    out.rel_residual = best_rel;
    out.converged = false;
    return out;
}

// dense Gaussian elimination with partial pivoting (small systems only)
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        if (a[k][k] == 0.0) throw Error("dense_solve: singular matrix");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

} // namespace ppum

#endif // PPUM_LINALG_HPP

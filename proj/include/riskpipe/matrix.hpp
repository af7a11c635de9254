#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskpipe/errors.hpp"

namespace riskpipe {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
///
/// Construction from explicit data rejects NaN/Inf entries; everything in the
/// library assumes finite values once a matrix exists.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, Vector data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                             " != rows*cols = " + std::to_string(rows_ * cols_));
        }
        check_finite();
    }

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.size() ? rows.begin()->size() : 0;
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw ShapeError("ragged initializer rows");
            m.data_.insert(m.data_.end(), r.begin(), r.end());
        }
        m.check_finite();
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    /// Copy of column c.
    Vector col(std::size_t c) const {
        Vector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, c);
        return out;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// New matrix keeping only the given columns, in the given order.
    Matrix select_cols(const std::vector<std::size_t>& idx) const {
        Matrix out(rows_, idx.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = (*this)(i, idx[j]);
        return out;
    }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    void check_finite() const {
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i])) {
                throw ArgumentError("non-finite matrix entry at flat index " + std::to_string(i));
            }
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

/// Standard matrix product (a.rows x b.cols).
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.cols()) + " != " + std::to_string(b.rows()));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) throw ShapeError("matvec dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        const auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

/// Solve a*x = b for symmetric positive definite a via Cholesky.
inline Vector solve_spd(const Matrix& a, const Vector& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("solve_spd: matrix not square");
    if (b.size() != n) throw ShapeError("solve_spd: rhs length mismatch");

    // Lower-triangular factor, stored dense.
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) {
            throw SingularError("solve_spd: non-positive pivot at column " + std::to_string(j));
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }

    // Forward then backward substitution.
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
        x[ii] = s / l(ii, ii);
    }
    return x;
}

struct EigenPairs {
    Vector values;   ///< descending
    Matrix vectors;  ///< one unit-norm eigenvector per row, aligned with values
};

/// Top-k eigenpairs of a symmetric matrix via cyclic Jacobi rotations.
///
/// Suited to the small (<= a few hundred) dimensions this library works at.
inline EigenPairs sym_eigen(const Matrix& a, std::size_t top_k) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw ShapeError("sym_eigen: matrix not square");
    if (top_k == 0 || top_k > n) throw ArgumentError("sym_eigen: top_k out of range");

    Matrix w = a;           // working copy, driven to diagonal
    Matrix v = Matrix::identity(n);  // accumulated rotations; columns are eigenvectors

    double frob = 0.0;
    for (double e : a.data()) frob += e * e;
    frob = std::sqrt(frob);
    const double tol = (frob > 0.0 ? frob : 1.0) * 1e-14;
    constexpr int kMaxSweeps = 100;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += w(p, q) * w(p, q);
        return std::sqrt(2.0 * s);
    };

    int sweep = 0;
    while (off_norm() > tol) {
        if (sweep++ >= kMaxSweeps) {
            throw ConvergenceError("sym_eigen: Jacobi did not converge in 100 sweeps");
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (std::abs(apq) <= tol / static_cast<double>(n)) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double wkp = w(k, p), wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double wpk = w(p, k), wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return w(x, x) > w(y, y); });

    EigenPairs out;
    out.values.resize(top_k);
    out.vectors = Matrix(top_k, n);
    for (std::size_t r = 0; r < top_k; ++r) {
        const std::size_t c = order[r];
        out.values[r] = w(c, c);
        double norm = 0.0;
        for (std::size_t k = 0; k < n; ++k) norm += v(k, c) * v(k, c);
        norm = std::sqrt(norm);
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, c) / norm;
    }
    return out;
}

/// Symmetric N x N matrix of squared Euclidean distances between rows of x.
inline Matrix pairwise_sq_dist(const Matrix& x) {
    if (x.rows() == 0) throw ArgumentError("pairwise_sq_dist: empty input");
    const std::size_t n = x.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = x.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto rj = x.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                const double diff = ri[k] - rj[k];
                s += diff * diff;
            }
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return d;
}

}  // namespace riskpipe

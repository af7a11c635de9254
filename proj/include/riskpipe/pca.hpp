#pragma once

#include <cmath>

#include "riskpipe/embedding.hpp"
#include "riskpipe/matrix.hpp"

namespace riskpipe {

struct PcaModel {
    Matrix components;          ///< 2 x d, orthonormal rows
    Vector explained_variance;  ///< descending
    Vector means;               ///< per-feature, subtracted before projecting
};

/// Top-2 principal components of the sample covariance matrix (divide by
/// N-1). Each component is sign-fixed so its largest-magnitude entry is
/// positive.
inline PcaModel pca_fit(const Matrix& x) {
    const std::size_t n = x.rows(), p = x.cols();
    if (n < 3) throw InsufficientDataError("pca_fit requires at least 3 rows");
    if (p < 2) throw ArgumentError("pca_fit requires at least 2 features");

    PcaModel m;
    m.means.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x(i, j);
        m.means[j] = s / static_cast<double>(n);
    }

    Matrix cov(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                s += (x(i, a) - m.means[a]) * (x(i, b) - m.means[b]);
            s /= static_cast<double>(n - 1);
            cov(a, b) = s;
            cov(b, a) = s;
        }
    }

    EigenPairs eig = sym_eigen(cov, 2);
    for (std::size_t r = 0; r < 2; ++r) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < p; ++j) {
            if (std::abs(eig.vectors(r, j)) > std::abs(eig.vectors(r, arg))) arg = j;
        }
        if (eig.vectors(r, arg) < 0.0) {
            for (std::size_t j = 0; j < p; ++j) eig.vectors(r, j) = -eig.vectors(r, j);
        }
    }
    m.components = std::move(eig.vectors);
    m.explained_variance = std::move(eig.values);
    return m;
}

/// Project rows of x: (x - means) . components^T.
inline Embedding pca_transform(const PcaModel& m, const Matrix& x) {
    if (x.cols() != m.means.size()) throw ShapeError("pca_transform: dimension mismatch");
    Embedding e;
    e.method = "pca";
    e.points = Matrix(x.rows(), 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t r = 0; r < 2; ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j)
                s += (x(i, j) - m.means[j]) * m.components(r, j);
            e.points(i, r) = s;
        }
    }
    return e;
}

}  // namespace riskpipe

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

struct Clustering {
    std::vector<std::size_t> labels;
    Matrix centroids;  ///< k x d
    double inertia = 0.0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<double> inertia_trace;  ///< inertia after each assignment pass
    std::size_t iterations = 0;
};

namespace detail {

inline double sq_dist_row(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

inline Matrix kmeanspp_init(const Matrix& x, std::size_t k, Rng& rng) {
    const std::size_t n = x.rows();
    Matrix centroids(k, x.cols());
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t first = rng.index(n);
    for (std::size_t j = 0; j < x.cols(); ++j) centroids(0, j) = x(first, j);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist_row(x.row(i), centroids.row(c - 1)));
            total += d2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.index(n);  // all points already coincide with a centroid
        } else {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        for (std::size_t j = 0; j < x.cols(); ++j) centroids(c, j) = x(pick, j);
    }
    return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ initialization.
///
/// Runs until the label assignment reaches a fixed point or 300 iterations.
/// Empty clusters are repaired by moving their centroid onto the member of
/// the largest cluster farthest from its own centroid.
inline Clustering kmeans(const Matrix& x, std::size_t k, std::uint64_t seed) {
    const std::size_t n = x.rows();
    if (k < 1 || k > n) throw ArgumentError("kmeans: k must lie in [1, N]");

    Rng rng(seed);
    Clustering out;
    out.k = k;
    out.seed = seed;
    out.centroids = detail::kmeanspp_init(x, k, rng);
    out.labels.assign(n, 0);

    constexpr std::size_t kMaxIter = 300;
    for (std::size_t iter = 0; iter < kMaxIter; ++iter) {
        // assignment
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = detail::sq_dist_row(x.row(i), out.centroids.row(c));
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            if (arg != out.labels[i]) {
                out.labels[i] = arg;
                changed = true;
            }
            inertia += best;
        }
        out.inertia_trace.push_back(inertia);
        out.inertia = inertia;
        out.iterations = iter + 1;
        if (!changed && iter > 0) break;

        // update
        Matrix sums(k, x.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[out.labels[i]]++;
            for (std::size_t j = 0; j < x.cols(); ++j) sums(out.labels[i], j) += x(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < x.cols(); ++j)
                out.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
        }
        // empty-cluster repair
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            const std::size_t big =
                static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) -
                                         counts.begin());
            double far = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (out.labels[i] != big) continue;
                const double d = detail::sq_dist_row(x.row(i), out.centroids.row(big));
                if (d > far) {
                    far = d;
                    far_i = i;
                }
            }
            for (std::size_t j = 0; j < x.cols(); ++j) out.centroids(c, j) = x(far_i, j);
            out.labels[far_i] = c;
            counts[c] = 1;
            counts[big]--;
        }
    }
    return out;
}

/// Mean silhouette over all samples: (b - a) / max(a, b) with a the mean
/// intra-cluster distance (self excluded) and b the smallest mean distance to
/// another cluster. Samples in singleton clusters contribute 0.
inline double silhouette(const Matrix& x, const std::vector<std::size_t>& labels) {
    const std::size_t n = x.rows();
    if (labels.size() != n) throw ShapeError("silhouette: label count mismatch");
    if (n < 3) throw ArgumentError("silhouette requires at least 3 samples");

    std::size_t k = 0;
    for (std::size_t l : labels) k = std::max(k, l + 1);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t l : labels) counts[l]++;
    std::size_t nonempty = 0;
    for (std::size_t c : counts) nonempty += (c > 0);
    if (nonempty < 2) throw UndefinedMetricError("silhouette undefined for a single cluster");

    const Matrix d2 = pairwise_sq_dist(x);
    double total = 0.0;
    std::vector<double> mean_to(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] == 1) continue;  // singleton scores 0
        std::fill(mean_to.begin(), mean_to.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to[labels[j]] += std::sqrt(d2(i, j));
        }
        double a = 0.0, b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            if (c == labels[i]) {
                a = mean_to[c] / static_cast<double>(counts[c] - 1);
            } else {
                b = std::min(b, mean_to[c] / static_cast<double>(counts[c]));
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

struct KSelection {
    std::size_t best_k = 0;
    std::vector<std::pair<std::size_t, double>> scores;  ///< (k, silhouette)
};

/// Silhouette-scored sweep of k; best_k is the argmax, ties to the smaller k.
/// Every k reuses the same seed.
inline KSelection select_k(const Matrix& x, std::size_t k_min, std::size_t k_max,
                           std::uint64_t seed) {
    if (k_min < 2 || k_min > k_max || k_max > x.rows() - 1) {
        throw ArgumentError("select_k requires 2 <= k_min <= k_max <= N-1");
    }
    KSelection sel;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = k_min; k <= k_max; ++k) {
        const Clustering c = kmeans(x, k, seed);
        const double s = silhouette(x, c.labels);
        sel.scores.emplace_back(k, s);
        if (s > best) {
            best = s;
            sel.best_k = k;
        }
    }
    return sel;
}

}  // namespace riskpipe

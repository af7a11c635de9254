#pragma once

#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "riskpipe/cluster.hpp"
#include "riskpipe/embedding.hpp"
#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

/// Row-conditional Gaussian affinities with per-row bandwidths calibrated by
/// binary search so each row's perplexity (2^entropy) hits the target within
/// 1e-5. The diagonal is zero and every row sums to 1.
///
/// Calibration sums run over the row's sorted distances, so rows with equal
/// distance multisets (exact duplicate points) get bitwise-identical
/// bandwidths and normalizers regardless of where in the row the duplicate
/// sits.
inline Matrix conditional_affinities(const Matrix& sq_dists, double perplexity) {
    const std::size_t n = sq_dists.rows();
    if (perplexity >= static_cast<double>(n)) {
        throw ArgumentError("perplexity must be smaller than the sample count");
    }
    if (perplexity <= 0.0) throw ArgumentError("perplexity must be > 0");

    Matrix p(n, n);
    Vector shifted(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) shifted[m++] = sq_dists(i, j);
        }
        std::sort(shifted.begin(), shifted.end());
        const double dmin = shifted[0];  // stable exponent shift
        for (double& d : shifted) d -= dmin;

        // achieved perplexity exp(H) and normalizer for beta = 1/(2 sigma^2)
        double norm = 0.0;
        auto achieved = [&](double beta) {
            double sum = 0.0, weighted = 0.0;
            for (double d : shifted) {
                const double w = std::exp(-beta * d);
                sum += w;
                weighted += w * d;
            }
            norm = sum;
            const double h = std::log(sum) + beta * weighted / sum;  // entropy in nats
            return std::exp(h);
        };

        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double beta = 1.0;
        double perp = achieved(beta);
        constexpr int kMaxExpand = 200;
        int expand = 0;
        while (std::abs(perp - perplexity) > 1e-6 && expand++ < kMaxExpand) {
            if (perp > perplexity) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (lo + beta);
            }
            perp = achieved(beta);
        }
        if (std::abs(perp - perplexity) > 1e-5) {
            throw CalibrationError("perplexity calibration failed for row " + std::to_string(i));
        }

        for (std::size_t j = 0; j < n; ++j) {
            p(i, j) = j == i ? 0.0 : std::exp(-beta * (sq_dists(i, j) - dmin)) / norm;
        }
    }
    return p;
}

/// Symmetrized joint affinities P = (Pc + Pc^T) / (2N); sums to 1.
inline Matrix perplexity_calibration(const Matrix& sq_dists, double perplexity) {
    const Matrix cond = conditional_affinities(sq_dists, perplexity);
    const std::size_t n = cond.rows();
    Matrix p(n, n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (cond(i, j) + cond(j, i)) * scale;
            p(i, j) = v;
            p(j, i) = v;
        }
    }
    return p;
}

/// Seeded N x 2 Gaussian initialization with standard deviation 1e-2.
inline Matrix tsne_gaussian_init(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Matrix y(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        y(i, 0) = 1e-2 * rng.normal();
        y(i, 1) = 1e-2 * rng.normal();
    }
    return y;
}

/// Exact (quadratic-cost) t-SNE from an explicit initial layout.
///
/// Gradient descent on KL(P||Q) with Student-t affinities Q, early
/// exaggeration x4 for the first min(100, iterations/4) steps and momentum
/// 0.5 switching to 0.8 after step 250. The optional kl_trace receives
/// KL against the un-exaggerated P before every step plus the final value
/// (iterations + 1 entries).
inline Embedding tsne_with_init(const Matrix& x, const TsneParams& params, const Matrix& y0,
                                std::vector<double>* kl_trace = nullptr) {
    const std::size_t n = x.rows();
    if (n < 5) throw InsufficientDataError("tsne requires at least 5 rows");
    params.validate(n);
    if (y0.rows() != n || y0.cols() != 2) throw ShapeError("tsne: init must be N x 2");

    const Matrix p = perplexity_calibration(pairwise_sq_dist(x), params.perplexity);
    const std::size_t exag_steps = std::min<std::size_t>(100, params.iterations / 4);
    constexpr double kExaggeration = 4.0;
    constexpr double kQGuard = 1e-12;

    Matrix y = y0;
    Matrix vel(n, 2);
    Matrix w(n, n);
    Vector grad(2 * n);

    double kl = 0.0;
    auto pass = [&](bool with_gradient, double p_factor) {
        // Student-t numerators and their sum
        double sum_w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                const double v = 1.0 / (1.0 + dx * dx + dy * dy);
                w(i, j) = v;
                w(j, i) = v;
                sum_w += 2.0 * v;
            }
        }
        sum_w = std::max(sum_w, kQGuard);

        kl = 0.0;
        if (with_gradient) std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double q = std::max(w(i, j) / sum_w, kQGuard);
                if (p(i, j) > 0.0) kl += 2.0 * p(i, j) * std::log(p(i, j) / q);
                if (with_gradient) {
                    const double coef = 4.0 * (p_factor * p(i, j) - q) * w(i, j);
                    const double gx = coef * (y(i, 0) - y(j, 0));
                    const double gy = coef * (y(i, 1) - y(j, 1));
                    grad[2 * i] += gx;
                    grad[2 * i + 1] += gy;
                    grad[2 * j] -= gx;
                    grad[2 * j + 1] -= gy;
                }
            }
        }
    };

    for (std::size_t step = 0; step < params.iterations; ++step) {
        const double p_factor = step < exag_steps ? kExaggeration : 1.0;
        const double momentum = step < 250 ? 0.5 : 0.8;
        pass(true, p_factor);
        if (kl_trace) kl_trace->push_back(kl);

        double mean_x = 0.0, mean_y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            vel(i, 0) = momentum * vel(i, 0) - params.learning_rate * grad[2 * i];
            vel(i, 1) = momentum * vel(i, 1) - params.learning_rate * grad[2 * i + 1];
            y(i, 0) += vel(i, 0);
            y(i, 1) += vel(i, 1);
            mean_x += y(i, 0);
            mean_y += y(i, 1);
        }
        mean_x /= static_cast<double>(n);
        mean_y /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y(i, 0) -= mean_x;
            y(i, 1) -= mean_y;
            if (!std::isfinite(y(i, 0)) || !std::isfinite(y(i, 1))) {
                throw EmbeddingError("tsne diverged to non-finite coordinates at step " +
                                     std::to_string(step));
            }
        }
    }

    pass(false, 1.0);  // final KL on the settled layout
    if (kl_trace) kl_trace->push_back(kl);

    Embedding e;
    e.points = std::move(y);
    e.method = "tsne";
    e.tsne_params = params;
    e.final_kl = kl;
    return e;
}

/// t-SNE from the standard seeded Gaussian initialization.
inline Embedding tsne(const Matrix& x, const TsneParams& params,
                      std::vector<double>* kl_trace = nullptr) {
    return tsne_with_init(x, params, tsne_gaussian_init(x.rows(), params.seed), kl_trace);
}

struct TsneGridResult {
    TsneParams params;
    double silhouette = 0.0;
    Embedding embedding;
    Clustering clustering;  ///< the k=2 clustering behind the silhouette
};

struct TsneGridSearch {
    std::vector<TsneGridResult> results;  ///< silhouette descending
    std::vector<std::string> warnings;    ///< one per skipped cell
};

/// Grid search over t-SNE hyperparameters scored by the silhouette of a
/// k-means (k=2) clustering of each embedding. Cells run in parallel;
/// failed cells are skipped with a warning. Results sort by silhouette
/// descending, then by (perplexity, learning rate, iterations).
inline TsneGridSearch grid_search_tsne(const Matrix& x, const std::vector<double>& perplexities,
                                       const std::vector<double>& learning_rates,
                                       const std::vector<std::size_t>& iteration_counts,
                                       std::uint64_t seed, std::size_t threads = 0) {
    if (perplexities.empty() || learning_rates.empty() || iteration_counts.empty()) {
        throw ArgumentError("grid_search_tsne: empty grid");
    }
    std::vector<TsneParams> cells;
    for (double p : perplexities) {
        for (double lr : learning_rates) {
            for (std::size_t it : iteration_counts) cells.push_back({p, lr, it, seed});
        }
    }

    std::vector<std::optional<TsneGridResult>> slots(cells.size());
    std::vector<std::string> errors(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            try {
                TsneGridResult r;
                r.params = cells[c];
                r.embedding = tsne(x, cells[c]);
                r.clustering = kmeans(r.embedding.points, 2, seed);
                r.silhouette = silhouette(r.embedding.points, r.clustering.labels);
                slots[c] = std::move(r);
            } catch (const std::exception& e) {
                errors[c] = e.what();
            }
        }
    };

    std::size_t n_threads = threads ? threads : std::thread::hardware_concurrency();
    n_threads = std::clamp<std::size_t>(n_threads, 1, cells.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    TsneGridSearch out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (slots[c]) {
            out.results.push_back(std::move(*slots[c]));
        } else {
            out.warnings.push_back("skipped cell (perplexity=" + std::to_string(cells[c].perplexity) +
                                   ", lr=" + std::to_string(cells[c].learning_rate) +
                                   ", iterations=" + std::to_string(cells[c].iterations) +
                                   "): " + errors[c]);
        }
    }
    std::sort(out.results.begin(), out.results.end(), [](const auto& a, const auto& b) {
        if (a.silhouette != b.silhouette) return a.silhouette > b.silhouette;
        if (a.params.perplexity != b.params.perplexity) return a.params.perplexity < b.params.perplexity;
        if (a.params.learning_rate != b.params.learning_rate)
            return a.params.learning_rate < b.params.learning_rate;
        return a.params.iterations < b.params.iterations;
    });
    return out;
}

/// Default log-scale grids; they include the strongest settings reported for
/// this kind of data.
inline std::vector<double> default_tsne_perplexities() { return {5.0, 30.0}; }
inline std::vector<double> default_tsne_learning_rates() { return {10.0, 1000.0}; }
inline std::vector<std::size_t> default_tsne_iterations() { return {250, 500, 1000}; }

}  // namespace riskpipe

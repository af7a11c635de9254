#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "riskpipe/cluster.hpp"
#include "riskpipe/pca.hpp"
#include "riskpipe/tsne.hpp"

#include "test_helpers.hpp"

using namespace riskpipe;
using testutil::random_matrix;
using testutil::two_blobs;

TEST_CASE("pca on axis-aligned data finds the axis", "[embed][pca]") {
    Rng rng(131);
    const std::size_t n = 40;
    Matrix x(n, 5);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = rng.uniform(-3.0, 3.0);

    const PcaModel m = pca_fit(x);
    CHECK(std::abs(m.components(0, 0)) == Catch::Approx(1.0).margin(1e-8));
    for (std::size_t j = 1; j < 5; ++j) {
        CHECK(m.components(0, j) == Catch::Approx(0.0).margin(1e-8));
    }
    CHECK(m.explained_variance[1] == Catch::Approx(0.0).margin(1e-10));
    // sign convention: the dominant entry is positive
    CHECK(m.components(0, 0) > 0.0);
}

TEST_CASE("isotropic planted plane gives near-equal explained variances", "[embed][pca]") {
    Rng rng(132);
    const std::size_t n = 4000;
    Matrix x(n, 28);
    for (std::size_t i = 0; i < n; ++i) {
        // 2-D isotropic Gaussian embedded in two fixed columns
        x(i, 3) = rng.normal();
        x(i, 11) = rng.normal();
    }
    const PcaModel m = pca_fit(x);
    CHECK(m.explained_variance[0] > 0.8);
    CHECK(m.explained_variance[1] > 0.8);
    CHECK(m.explained_variance[0] / m.explained_variance[1] < 1.15);
}

TEST_CASE("pca explained variance matches the brute covariance eigen-oracle", "[embed][pca]") {
    Rng rng(133);
    const std::size_t n = 200, p = 28;
    Matrix x = random_matrix(rng, n, p, -1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) x(i, 2) *= 4.0;  // a dominant direction

    const PcaModel m = pca_fit(x);

    // oracle: covariance assembled by loops, full eigensolve via sym_eigen
    Vector means(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) means[j] += x(i, j);
        means[j] /= static_cast<double>(n);
    }
    Matrix cov(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += (x(i, a) - means[a]) * (x(i, b) - means[b]);
            cov(a, b) = s / static_cast<double>(n - 1);
        }
    const EigenPairs full = sym_eigen(cov, p);
    CHECK(m.explained_variance[0] == Catch::Approx(full.values[0]).margin(1e-8));
    CHECK(m.explained_variance[1] == Catch::Approx(full.values[1]).margin(1e-8));

    // orthonormal components, descending variances, bounded total
    double dot = 0.0, n0 = 0.0, n1 = 0.0, total_var = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        dot += m.components(0, j) * m.components(1, j);
        n0 += m.components(0, j) * m.components(0, j);
        n1 += m.components(1, j) * m.components(1, j);
        total_var += cov(j, j);
    }
    CHECK(dot == Catch::Approx(0.0).margin(1e-8));
    CHECK(n0 == Catch::Approx(1.0).margin(1e-8));
    CHECK(n1 == Catch::Approx(1.0).margin(1e-8));
    CHECK(m.explained_variance[0] >= m.explained_variance[1]);
    CHECK(m.explained_variance[0] + m.explained_variance[1] <= total_var + 1e-8);
}

TEST_CASE("pca_transform maps the mean row to the origin", "[embed][pca]") {
    Rng rng(134);
    const Matrix x = random_matrix(rng, 30, 6);
    const PcaModel m = pca_fit(x);
    Matrix mean_row(1, 6);
    for (std::size_t j = 0; j < 6; ++j) mean_row(0, j) = m.means[j];
    const Embedding e = pca_transform(m, mean_row);
    CHECK(e.points(0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(e.points(0, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(e.method == "pca");
}

TEST_CASE("pca preserves distances for data inside the component plane", "[embed][pca]") {
    Rng rng(135);
    const std::size_t n = 25;
    Matrix x(n, 7);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 1) = rng.uniform(-2.0, 2.0);  // plane spanned by e1 and e4
        x(i, 4) = rng.uniform(-2.0, 2.0);
    }
    const PcaModel m = pca_fit(x);
    const Embedding e = pca_transform(m, x);
    const Matrix d_low = pairwise_sq_dist(e.points);
    const Matrix d_high = pairwise_sq_dist(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            CHECK(d_low(i, j) == Catch::Approx(d_high(i, j)).margin(1e-9));
}

TEST_CASE("projecting a projection is idempotent", "[embed][pca]") {
    Rng rng(136);
    const Matrix x = random_matrix(rng, 30, 6);
    const PcaModel m = pca_fit(x);
    const Embedding e = pca_transform(m, x);

    // reconstruct into the original space, then project again
    Matrix recon(30, 6);
    for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            recon(i, j) = m.means[j] + e.points(i, 0) * m.components(0, j) +
                          e.points(i, 1) * m.components(1, j);
        }
    const Embedding again = pca_transform(m, recon);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(again.points(i, 0) == Catch::Approx(e.points(i, 0)).margin(1e-9));
        CHECK(again.points(i, 1) == Catch::Approx(e.points(i, 1)).margin(1e-9));
    }
    CHECK_THROWS_AS(pca_fit(Matrix(2, 5)), InsufficientDataError);
}

TEST_CASE("three equidistant points calibrate to uniform conditionals", "[embed][tsne]") {
    // equilateral triangle: every off-diagonal conditional must be 1/2
    const double s = std::sqrt(3.0) / 2.0;
    const Matrix x = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.5, s}});
    const Matrix cond = conditional_affinities(pairwise_sq_dist(x), 2.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(cond(i, i) == 0.0);
        for (std::size_t j = 0; j < 3; ++j) {
            if (i != j) CHECK(cond(i, j) == Catch::Approx(0.5).margin(1e-9));
        }
    }
}

TEST_CASE("conditional rows sum to 1 and hit the target perplexity", "[embed][tsne]") {
    Rng rng(137);
    const Matrix x = random_matrix(rng, 20, 4, -2.0, 2.0);
    const double target = 7.5;
    const Matrix cond = conditional_affinities(pairwise_sq_dist(x), target);
    for (std::size_t i = 0; i < 20; ++i) {
        double sum = 0.0, entropy = 0.0;
        for (std::size_t j = 0; j < 20; ++j) {
            sum += cond(i, j);
            if (cond(i, j) > 0.0) entropy -= cond(i, j) * std::log2(cond(i, j));
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-9));
        CHECK(std::exp2(entropy) == Catch::Approx(target).margin(1e-4));
    }
}

TEST_CASE("symmetrized affinities are symmetric, nonnegative, and sum to 1", "[embed][tsne]") {
    Rng rng(138);
    const Matrix x = random_matrix(rng, 15, 3);
    const Matrix p = perplexity_calibration(pairwise_sq_dist(x), 5.0);
    double total = 0.0;
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j) {
            CHECK(p(i, j) >= 0.0);
            CHECK(p(i, j) == p(j, i));
            total += p(i, j);
        }
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("perplexity calibration rejects unreachable targets", "[embed][tsne]") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}});
    CHECK_THROWS_AS(conditional_affinities(pairwise_sq_dist(x), 5.0), ArgumentError);
    // duplicated points: perplexity below the duplicate multiplicity is unreachable
    const Matrix dup = Matrix::from_rows({{0.0}, {0.0}, {0.0}, {0.0}, {9.0}});
    CHECK_THROWS_AS(conditional_affinities(pairwise_sq_dist(dup), 1.2), CalibrationError);
}

TEST_CASE("tsne separates two blobs into silhouette > 0.5", "[embed][tsne]") {
    const auto [x, truth] = two_blobs(10, 4, 10.0, 21);
    TsneParams params;
    params.perplexity = 8.0;
    params.learning_rate = 100.0;
    params.iterations = 800;
    params.seed = 2;
    const Embedding e = tsne(x, params);

    const Clustering c = kmeans(e.points, 2, 3);
    CHECK(silhouette(e.points, c.labels) > 0.5);

    // the embedded blobs are linearly separable by the perpendicular bisector
    // of the two embedded blob centroids
    double c0x = 0.0, c0y = 0.0, c1x = 0.0, c1y = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        (truth[i] == 0 ? c0x : c1x) += e.points(i, 0) / 10.0;
        (truth[i] == 0 ? c0y : c1y) += e.points(i, 1) / 10.0;
    }
    const double mx = 0.5 * (c0x + c1x), my = 0.5 * (c0y + c1y);
    const double nx = c1x - c0x, ny = c1y - c0y;
    for (std::size_t i = 0; i < 20; ++i) {
        const double side = (e.points(i, 0) - mx) * nx + (e.points(i, 1) - my) * ny;
        CHECK((side > 0.0) == (truth[i] == 1));
    }
}

TEST_CASE("tsne is deterministic under seed and params", "[embed][tsne]") {
    const auto [x, truth] = two_blobs(8, 3, 6.0, 9);
    TsneParams params;
    params.perplexity = 4.0;
    params.learning_rate = 50.0;
    params.iterations = 120;
    params.seed = 31;
    const Embedding a = tsne(x, params);
    const Embedding b = tsne(x, params);
    CHECK(a.points == b.points);
    CHECK(*a.final_kl == *b.final_kl);
}

TEST_CASE("kl trace is finite and improves after exaggeration ends", "[embed][tsne]") {
    const auto [x, truth] = two_blobs(10, 3, 5.0, 13);
    TsneParams params;
    params.perplexity = 6.0;
    params.learning_rate = 80.0;
    params.iterations = 400;
    params.seed = 4;
    std::vector<double> trace;
    const Embedding e = tsne(x, params, &trace);
    REQUIRE(trace.size() == params.iterations + 1);
    for (double kl : trace) {
        CHECK(std::isfinite(kl));
        CHECK(kl >= -1e-12);
    }
    const std::size_t exag_end = std::min<std::size_t>(100, params.iterations / 4);
    CHECK(trace.back() <= trace[exag_end]);
    CHECK(*e.final_kl == trace.back());
}

TEST_CASE("duplicated rows with colliding initialization stay coincident",
          "[embed][tsne][property]") {
    Rng rng(139);
    Matrix x = random_matrix(rng, 10, 3);
    for (std::size_t j = 0; j < 3; ++j) x(7, j) = x(2, j);  // rows 2 and 7 identical

    TsneParams params;
    params.perplexity = 4.0;
    params.learning_rate = 40.0;
    params.iterations = 300;
    params.seed = 6;
    Matrix y0 = tsne_gaussian_init(10, params.seed);
    y0(7, 0) = y0(2, 0);  // identical initialization for the identical rows
    y0(7, 1) = y0(2, 1);

    const Embedding e = tsne_with_init(x, params, y0);
    CHECK(e.points(7, 0) == Catch::Approx(e.points(2, 0)).margin(1e-6));
    CHECK(e.points(7, 1) == Catch::Approx(e.points(2, 1)).margin(1e-6));
}

TEST_CASE("swapping identical rows and their init rows swaps the embedding",
          "[embed][tsne][property]") {
    // permutation equivariance; checked over a short horizon because bitwise
    // summation-order differences grow chaotically over long descents
    Rng rng(140);
    Matrix x = random_matrix(rng, 10, 3);
    for (std::size_t j = 0; j < 3; ++j) x(7, j) = x(2, j);

    TsneParams params;
    params.perplexity = 4.0;
    params.learning_rate = 20.0;
    params.iterations = 40;
    params.seed = 6;
    const Matrix y0 = tsne_gaussian_init(10, params.seed);
    Matrix y0_swapped = y0;
    for (std::size_t j = 0; j < 2; ++j) std::swap(y0_swapped(2, j), y0_swapped(7, j));

    const Embedding a = tsne_with_init(x, params, y0);
    const Embedding b = tsne_with_init(x, params, y0_swapped);
    for (std::size_t i = 0; i < 10; ++i) {
        const std::size_t src = i == 2 ? 7 : (i == 7 ? 2 : i);
        CHECK(b.points(i, 0) == Catch::Approx(a.points(src, 0)).margin(1e-6));
        CHECK(b.points(i, 1) == Catch::Approx(a.points(src, 1)).margin(1e-6));
    }
}

TEST_CASE("low-dimensional affinities are symmetric, nonnegative, and sum to 1",
          "[embed][tsne][property]") {
    // recompute Q from the settled layout by its definition
    const auto [x, truth] = two_blobs(8, 3, 5.0, 33);
    TsneParams params;
    params.perplexity = 5.0;
    params.learning_rate = 60.0;
    params.iterations = 200;
    params.seed = 12;
    const Embedding e = tsne(x, params);

    const std::size_t n = 16;
    Matrix q(n, n);
    double sum_w = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dx = e.points(i, 0) - e.points(j, 0);
            const double dy = e.points(i, 1) - e.points(j, 1);
            q(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
            sum_w += q(i, j);
        }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) q(i, j) /= sum_w;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(q(i, j) >= 0.0);
            CHECK(q(i, j) == q(j, i));
            total += q(i, j);
        }
    CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("tsne input validation", "[embed][tsne]") {
    const Matrix tiny = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}});
    TsneParams params;
    CHECK_THROWS_AS(tsne(tiny, params), InsufficientDataError);

    const auto [x, truth] = two_blobs(5, 2, 4.0, 1);
    params.perplexity = 0.0;
    CHECK_THROWS_AS(tsne(x, params), ArgumentError);
    params.perplexity = 5.0;
    params.iterations = 0;
    CHECK_THROWS_AS(tsne(x, params), ArgumentError);
}

TEST_CASE("a 1x1x1 grid equals the direct run", "[embed][tsne][grid]") {
    const auto [x, truth] = two_blobs(8, 3, 6.0, 17);
    const TsneGridSearch gs = grid_search_tsne(x, {4.0}, {80.0}, {150}, 23, 1);
    REQUIRE(gs.results.size() == 1);
    CHECK(gs.warnings.empty());

    TsneParams params;
    params.perplexity = 4.0;
    params.learning_rate = 80.0;
    params.iterations = 150;
    params.seed = 23;
    const Embedding direct = tsne(x, params);
    CHECK(gs.results[0].embedding.points == direct.points);

    const Clustering c = kmeans(direct.points, 2, 23);
    CHECK(gs.results[0].silhouette == Catch::Approx(silhouette(direct.points, c.labels)));
}

TEST_CASE("grid results sort by silhouette and skip infeasible cells", "[embed][tsne][grid]") {
    const auto [x, truth] = two_blobs(10, 3, 8.0, 29);
    const TsneGridSearch gs =
        grid_search_tsne(x, {5.0, 50.0}, {50.0, 200.0}, {100, 250}, 7, 2);
    // perplexity 50 >= N=20 is infeasible: 4 cells skipped with warnings
    CHECK(gs.warnings.size() == 4);
    REQUIRE(gs.results.size() == 4);
    for (std::size_t i = 1; i < gs.results.size(); ++i) {
        CHECK(gs.results[i - 1].silhouette >= gs.results[i].silhouette);
    }
    CHECK_THROWS_AS(grid_search_tsne(x, {}, {50.0}, {100}, 7), ArgumentError);
}

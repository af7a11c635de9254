#include <catch2/catch_amalgamated.hpp>

#include "riskpipe/metrics.hpp"
#include "riskpipe/svr.hpp"
#include "test_helpers.hpp"

using namespace riskpipe;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

Matrix kernel_rbf(const Matrix& x, double gamma) {
    const Matrix d = pairwise_sq_dist(x);
    Matrix k(x.rows(), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.rows(); ++j) k(i, j) = std::exp(-gamma * d(i, j));
    return k;
}

// Brute-force oracle A: enumerate 7 coordinates over a coarse grid, fix the
// 8th to the value closing sum(delta) = 0, keep the best objective.
double grid_enumeration_oracle(const Matrix& k, const Vector& y, double c, double epsilon,
                               std::size_t grid_points) {
    const std::size_t n = y.size();
    REQUIRE(n == 8);
    std::vector<double> grid(grid_points);
    for (std::size_t g = 0; g < grid_points; ++g) {
        grid[g] = -c + 2.0 * c * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    }
    Vector delta(n, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(n - 1, 0);
    for (;;) {
        double sum = 0.0;
        for (std::size_t v = 0; v < n - 1; ++v) {
            delta[v] = grid[idx[v]];
            sum += delta[v];
        }
        if (std::abs(sum) <= c) {
            delta[n - 1] = -sum;
            best = std::max(best, svr_dual_objective(k, y, epsilon, delta));
        }
        std::size_t v = 0;
        while (v < n - 1 && ++idx[v] == grid_points) {
            idx[v] = 0;
            ++v;
        }
        if (v == n - 1) break;
    }
    return best;
}

// Brute-force oracle B: greedy pairwise grid descent. For every pair, try a
// dense grid of feasible exchange steps and apply the best improvement until
// nothing improves.
double pair_grid_descent_oracle(const Matrix& k, const Vector& y, double c, double epsilon) {
    const std::size_t n = y.size();
    Vector delta(n, 0.0);
    double current = 0.0;
    for (int round = 0; round < 4000; ++round) {
        double best_gain = 1e-10;
        std::size_t best_i = 0, best_j = 0;
        double best_t = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double t_lo = std::max(-c - delta[i], delta[j] - c);
                const double t_hi = std::min(c - delta[i], delta[j] + c);
                if (t_hi <= t_lo) continue;
                for (int g = 0; g <= 400; ++g) {
                    const double t = t_lo + (t_hi - t_lo) * g / 400.0;
                    Vector cand = delta;
                    cand[i] += t;
                    cand[j] -= t;
                    const double w = svr_dual_objective(k, y, epsilon, cand);
                    if (w - current > best_gain) {
                        best_gain = w - current;
                        best_i = i;
                        best_j = j;
                        best_t = t;
                    }
                }
            }
        }
        if (best_gain <= 1e-10) break;
        delta[best_i] += best_t;
        delta[best_j] -= best_t;
        current = svr_dual_objective(k, y, epsilon, delta);
    }
    return current;
}

}  // namespace

TEST_CASE("rbf kernel of a point with itself is 1", "[regress][svr]") {
    Rng rng(81);
    const Matrix x = random_matrix(rng, 4, 6);
    for (double gamma : {0.01, 0.5, 3.0}) {
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(rbf_kernel(x.row(i), x.row(i), gamma) == 1.0);
        }
    }
}

TEST_CASE("constant targets with a wide tube give a flat predictor", "[regress][svr]") {
    Rng rng(82);
    const Matrix x = random_matrix(rng, 12, 3);
    const Vector y(12, 7.5);
    Hyperparams h;
    h.svr_epsilon = 1.0;
    const ModelFit m = fit_svr(x, y, h, SvrKernel::rbf);
    CHECK(m.diagnostics.converged);
    const Vector pred = predict(m, x);
    for (double p : pred) {
        CHECK(p == Catch::Approx(7.5).margin(1e-9));
        CHECK(std::abs(p - 7.5) <= 1.0);  // inside the tube
    }
}

TEST_CASE("svr dual solution is feasible on random instances", "[regress][svr][property]") {
    Rng rng(83);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 8 + rng.index(16);
        const Matrix x = random_matrix(rng, n, 3, -2.0, 2.0);
        const Vector y = random_vector(rng, n, -3.0, 3.0);
        const double c = 0.5 + rng.uniform(0.0, 2.0);
        const Matrix k = kernel_rbf(x, 0.4);
        const SvrSolution sol = solve_svr_dual(k, y, c, 0.05);
        double sum = 0.0;
        for (double d : sol.delta) {
            sum += d;
            CHECK(std::abs(d) <= c + 1e-9);
        }
        CHECK(std::abs(sum) < 1e-6);
        CHECK(sol.converged);
    }
}

TEST_CASE("smo matches the coarse grid-enumeration oracle on the 8-point problem",
          "[regress][svr]") {
    // bound-saturating 1-D problem: strong alternating targets drive every
    // dual coordinate to a box vertex the grid contains
    const Matrix x = Matrix::from_rows(
        {{-2.0}, {-1.5}, {-1.0}, {-0.5}, {0.5}, {1.0}, {1.5}, {2.0}});
    const Vector y{5.0, -5.0, 5.0, -5.0, 5.0, -5.0, 5.0, -5.0};
    const double c = 1.0, epsilon = 0.1;
    const Matrix k = kernel_rbf(x, 0.5);

    const SvrSolution sol = solve_svr_dual(k, y, c, epsilon, 1e-4);
    const double oracle = grid_enumeration_oracle(k, y, c, epsilon, 9);
    CHECK(sol.objective == Catch::Approx(oracle).margin(1e-3));
}

TEST_CASE("smo beats or ties the pair-grid-descent oracle", "[regress][svr]") {
    Rng rng(84);
    const Matrix x = random_matrix(rng, 8, 1, -2.0, 2.0);
    const Vector y = random_vector(rng, 8, -2.0, 2.0);
    const Matrix k = kernel_rbf(x, 0.7);
    const SvrSolution sol = solve_svr_dual(k, y, 1.5, 0.1, 1e-4);
    const double oracle = pair_grid_descent_oracle(k, y, 1.5, 0.1);
    CHECK(sol.objective >= oracle - 1e-3);
    CHECK(sol.objective == Catch::Approx(oracle).margin(1e-3));
}

TEST_CASE("svr linear exposes collapsed weights", "[regress][svr]") {
    Rng rng(85);
    const std::size_t n = 40;
    Matrix x = random_matrix(rng, n, 3, -1.0, 1.0);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 2.0 * x(i, 1) + 0.05 * rng.normal();
    Hyperparams h;
    h.svr_c = 10.0;
    h.svr_epsilon = 0.05;
    const ModelFit m = fit_svr(x, y, h, SvrKernel::linear);
    REQUIRE(m.has_coefficients());
    CHECK(m.coefficients().size() == 3);
    CHECK(m.coefficients()[1] > 1.0);  // dominant direction survives
    const Vector pred = predict(m, x);
    CHECK(mae(pred, y) < 0.2);
}

TEST_CASE("svr reports non-convergence at a tiny iteration cap", "[regress][svr]") {
    Rng rng(86);
    const Matrix x = random_matrix(rng, 20, 2);
    const Vector y = random_vector(rng, 20, -5.0, 5.0);
    const SvrSolution sol = solve_svr_dual(kernel_rbf(x, 0.5), y, 1.0, 0.1, 1e-6, 2);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 2);
}

TEST_CASE("svr validates its hyperparameters", "[regress][svr]") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    const Vector y{0.0, 1.0};
    Hyperparams h;
    h.svr_c = -1.0;
    CHECK_THROWS_AS(fit_svr(x, y, h, SvrKernel::rbf), ArgumentError);
    h = Hyperparams{};
    h.svr_epsilon = -0.5;
    CHECK_THROWS_AS(fit_svr(x, y, h, SvrKernel::rbf), ArgumentError);
    h = Hyperparams{};
    h.rbf_gamma = 0.0;
    CHECK_THROWS_AS(fit_svr(x, y, h, SvrKernel::rbf), ArgumentError);
}

#include <catch2/catch_amalgamated.hpp>

#include "riskpipe/matrix.hpp"
#include "test_helpers.hpp"

using namespace riskpipe;
using testutil::matmul_oracle;
using testutil::random_matrix;
using testutil::random_spd;
using testutil::random_symmetric;
using testutil::random_vector;

TEST_CASE("matrix construction validates shape and finiteness", "[numcore]") {
    CHECK_THROWS_AS(Matrix(2, 2, Vector{1.0, 2.0, 3.0}), ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, Vector{1.0, std::nan("")}), ArgumentError);
    CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), ShapeError);
    const Matrix m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(m(1, 0) == 3.0);
}

TEST_CASE("matmul identity and hand arithmetic", "[numcore]") {
    const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
    CHECK(matmul(Matrix::identity(2), a) == a);

    const Matrix b = Matrix::from_rows({{1.0}, {1.0}});
    const Matrix c = matmul(a, b);
    CHECK(c(0, 0) == 3.0);
    CHECK(c(1, 0) == 7.0);
}

TEST_CASE("matmul matches the triple-loop oracle", "[numcore]") {
    Rng rng(101);
    const Matrix a = random_matrix(rng, 5, 4);
    const Matrix b = random_matrix(rng, 4, 3);
    const Matrix got = matmul(a, b);
    const Matrix want = matmul_oracle(a, b);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(got(i, j) == Catch::Approx(want(i, j)).margin(1e-12));
}

TEST_CASE("matmul rejects mismatched shapes", "[numcore]") {
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
}

TEST_CASE("matmul associativity on random triples", "[numcore][property]") {
    Rng rng(202);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(rng, 4, 6);
        const Matrix b = random_matrix(rng, 6, 3);
        const Matrix c = random_matrix(rng, 3, 5);
        const Matrix left = matmul(matmul(a, b), c);
        const Matrix right = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < left.rows(); ++i) {
            for (std::size_t j = 0; j < left.cols(); ++j) {
                const double scale = std::max(1.0, std::abs(left(i, j)));
                CHECK(std::abs(left(i, j) - right(i, j)) / scale < 1e-9);
            }
        }
    }
}

TEST_CASE("solve_spd identity and diagonal systems", "[numcore]") {
    const Vector b{2.0, 8.0};
    const Vector x_id = solve_spd(Matrix::identity(2), b);
    CHECK(x_id[0] == Catch::Approx(2.0));
    CHECK(x_id[1] == Catch::Approx(8.0));

    const Matrix d = Matrix::from_rows({{2.0, 0.0}, {0.0, 4.0}});
    const Vector x = solve_spd(d, b);
    CHECK(x[0] == Catch::Approx(1.0));
    CHECK(x[1] == Catch::Approx(2.0));
}

TEST_CASE("solve_spd residual on random SPD systems", "[numcore][property]") {
    Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_spd(rng, 6);
        const Vector b = random_vector(rng, 6, -3.0, 3.0);
        const Vector x = solve_spd(a, b);
        const Vector back = matvec(a, x);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < 6; ++i) {
            num += (back[i] - b[i]) * (back[i] - b[i]);
            den += b[i] * b[i];
        }
        CHECK(std::sqrt(num) / std::sqrt(den) < 1e-9);
    }
}

TEST_CASE("solve_spd rejects non-SPD input", "[numcore]") {
    const Matrix neg = Matrix::from_rows({{-1.0, 0.0}, {0.0, 1.0}});
    CHECK_THROWS_AS(solve_spd(neg, Vector{1.0, 1.0}), SingularError);
    CHECK_THROWS_AS(solve_spd(Matrix(2, 3), Vector{1.0, 1.0}), ShapeError);
}

TEST_CASE("sym_eigen on diagonal and identity matrices", "[numcore]") {
    const EigenPairs e = sym_eigen(Matrix::from_rows({{3.0, 0.0}, {0.0, 1.0}}), 2);
    CHECK(e.values[0] == Catch::Approx(3.0));
    CHECK(e.values[1] == Catch::Approx(1.0));
    CHECK(std::abs(e.vectors(0, 0)) == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(e.vectors(1, 1)) == Catch::Approx(1.0).margin(1e-12));

    const EigenPairs id = sym_eigen(Matrix::identity(4), 4);
    for (double v : id.values) CHECK(v == Catch::Approx(1.0));
}

TEST_CASE("sym_eigen satisfies the defining equation", "[numcore][property]") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_symmetric(rng, 5);
        const EigenPairs e = sym_eigen(a, 5);
        for (std::size_t r = 0; r < 5; ++r) {
            for (std::size_t i = 0; i < 5; ++i) {
                double av = 0.0;
                for (std::size_t j = 0; j < 5; ++j) av += a(i, j) * e.vectors(r, j);
                CHECK(av == Catch::Approx(e.values[r] * e.vectors(r, i)).margin(1e-8));
            }
        }
        for (std::size_t r = 1; r < 5; ++r) CHECK(e.values[r - 1] >= e.values[r]);
    }
}

TEST_CASE("sym_eigen eigenvector Gram matrix is the identity", "[numcore][property]") {
    Rng rng(505);
    const Matrix a = random_symmetric(rng, 6);
    const EigenPairs e = sym_eigen(a, 6);
    for (std::size_t r = 0; r < 6; ++r) {
        for (std::size_t s = 0; s < 6; ++s) {
            double dot = 0.0;
            for (std::size_t j = 0; j < 6; ++j) dot += e.vectors(r, j) * e.vectors(s, j);
            CHECK(dot == Catch::Approx(r == s ? 1.0 : 0.0).margin(1e-8));
        }
    }
}

TEST_CASE("pairwise_sq_dist basics", "[numcore]") {
    const Matrix one = Matrix::from_rows({{1.5, -2.0}});
    const Matrix d1 = pairwise_sq_dist(one);
    CHECK(d1.rows() == 1);
    CHECK(d1(0, 0) == 0.0);

    const Matrix tri = Matrix::from_rows({{0.0, 0.0}, {3.0, 4.0}});
    CHECK(pairwise_sq_dist(tri)(0, 1) == Catch::Approx(25.0));
}

TEST_CASE("pairwise_sq_dist matches the per-pair loop oracle", "[numcore]") {
    Rng rng(606);
    const Matrix x = random_matrix(rng, 10, 4, -2.0, 2.0);
    const Matrix d = pairwise_sq_dist(x);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(d(i, i) == 0.0);
        for (std::size_t j = 0; j < 10; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                const double diff = x(i, k) - x(j, k);
                s += diff * diff;
            }
            CHECK(d(i, j) == Catch::Approx(s).margin(1e-10));
            CHECK(d(i, j) == d(j, i));
        }
    }
}

TEST_CASE("pairwise distances satisfy the triangle inequality", "[numcore][property]") {
    Rng rng(707);
    const Matrix x = random_matrix(rng, 8, 3, -5.0, 5.0);
    const Matrix d2 = pairwise_sq_dist(x);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            for (std::size_t k = 0; k < 8; ++k) {
                CHECK(std::sqrt(d2(i, j)) <=
                      std::sqrt(d2(i, k)) + std::sqrt(d2(k, j)) + 1e-12);
            }
}

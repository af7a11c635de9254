#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "riskpipe/regress.hpp"

namespace riskpipe {

enum class SvrKernel { linear, rbf };

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        d += diff * diff;
    }
    return std::exp(-gamma * d);
}

/// Dual objective of epsilon-SVR in the delta = alpha - alpha* form:
///   W(delta) = -1/2 delta'K delta - epsilon ||delta||_1 + y'delta
/// maximized subject to sum(delta) = 0 and |delta_i| <= C.
inline double svr_dual_objective(const Matrix& k, const Vector& y, double epsilon,
                                 const Vector& delta) {
    const std::size_t n = y.size();
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (delta[i] == 0.0) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += k(i, j) * delta[j];
        quad += delta[i] * s;
    }
    double l1 = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        l1 += std::abs(delta[i]);
        lin += y[i] * delta[i];
    }
    return -0.5 * quad - epsilon * l1 + lin;
}

struct SvrSolution {
    Vector delta;
    double bias = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double objective = 0.0;
};

/// SMO-style solver for the epsilon-SVR dual.
///
/// Repeatedly picks the maximal violating pair and solves the resulting
/// one-dimensional piecewise-quadratic subproblem exactly (the |delta| terms
/// add breakpoints where a coordinate crosses zero). Pairwise updates keep
/// sum(delta) = 0 exact; clipping keeps |delta_i| <= C. Terminates when the
/// KKT violation drops below tol or the iteration cap is hit (reported in
/// the returned converged flag, not an error).
inline SvrSolution solve_svr_dual(const Matrix& k, const Vector& y, double c, double epsilon,
                                  double tol = 1e-3, std::size_t max_iter = 200000) {
    const std::size_t n = y.size();
    if (k.rows() != n || k.cols() != n) throw ShapeError("solve_svr_dual: kernel shape mismatch");
    if (c <= 0.0) throw ArgumentError("svr C must be > 0");
    if (epsilon < 0.0) throw ArgumentError("svr epsilon must be >= 0");

    SvrSolution sol;
    sol.delta.assign(n, 0.0);
    Vector f = y;  // f_i = y_i - (K delta)_i

    // Marginal gain of increasing / decreasing delta_i; the optimality gap is
    // max(up) - min(low) over the movable coordinates.
    auto up_value = [&](std::size_t i) { return sol.delta[i] >= 0.0 ? f[i] - epsilon : f[i] + epsilon; };
    auto low_value = [&](std::size_t i) { return sol.delta[i] <= 0.0 ? f[i] + epsilon : f[i] - epsilon; };

    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        std::size_t best_i = n, best_j = n;
        double b_up = -std::numeric_limits<double>::infinity();
        double b_low = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.delta[i] < c) {
                const double u = up_value(i);
                if (u > b_up) {
                    b_up = u;
                    best_i = i;
                }
            }
            if (sol.delta[i] > -c) {
                const double l = low_value(i);
                if (l < b_low) {
                    b_low = l;
                    best_j = i;
                }
            }
        }
        if (best_i == n || best_j == n || b_up - b_low <= tol) {
            sol.converged = true;
            sol.bias = 0.5 * (b_up + b_low);
            break;
        }

        const std::size_t i = best_i, j = best_j;
        const double di = sol.delta[i], dj = sol.delta[j];
        const double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
        const double t_lo = std::max(-c - di, dj - c);
        const double t_hi = std::min(c - di, dj + c);

        // ΔW(t) = t (f_i - f_j) - eta t^2 / 2 - eps(|di+t| - |di|) - eps(|dj-t| - |dj|)
        auto delta_w = [&](double t) {
            return t * (f[i] - f[j]) - 0.5 * eta * t * t -
                   epsilon * (std::abs(di + t) - std::abs(di)) -
                   epsilon * (std::abs(dj - t) - std::abs(dj));
        };

        std::array<double, 8> candidates{};
        std::size_t n_cand = 0;
        candidates[n_cand++] = t_lo;
        candidates[n_cand++] = t_hi;
        candidates[n_cand++] = std::clamp(-di, t_lo, t_hi);  // delta_i crosses zero
        candidates[n_cand++] = std::clamp(dj, t_lo, t_hi);   // delta_j crosses zero
        if (eta > 0.0) {
            for (double si : {-1.0, 1.0}) {
                for (double sj : {-1.0, 1.0}) {
                    const double t = (f[i] - f[j] - epsilon * si + epsilon * sj) / eta;
                    candidates[n_cand++] = std::clamp(t, t_lo, t_hi);
                }
            }
        }

        double best_t = 0.0, best_gain = 0.0;
        for (std::size_t ci = 0; ci < n_cand; ++ci) {
            const double g = delta_w(candidates[ci]);
            if (g > best_gain) {
                best_gain = g;
                best_t = candidates[ci];
            }
        }
        if (best_gain <= 0.0) {
            // maximal violating pair cannot improve; numerically stuck
            sol.bias = 0.5 * (b_up + b_low);
            break;
        }

        sol.delta[i] = std::clamp(di + best_t, -c, c);
        sol.delta[j] = std::clamp(dj - best_t, -c, c);
        for (std::size_t m = 0; m < n; ++m) f[m] -= best_t * (k(m, i) - k(m, j));
    }
    if (it == max_iter) {
        // recompute the bias from the final gap
        double b_up = -std::numeric_limits<double>::infinity();
        double b_low = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.delta[i] < c) b_up = std::max(b_up, up_value(i));
            if (sol.delta[i] > -c) b_low = std::min(b_low, low_value(i));
        }
        sol.bias = 0.5 * (b_up + b_low);
    }
    sol.iterations = it;
    sol.objective = svr_dual_objective(k, y, epsilon, sol.delta);
    return sol;
}

/// Epsilon-SVR with a linear or RBF kernel.
///
/// Linear fits collapse the dual solution to explicit weights
/// (w = sum_i delta_i x_i) so coefficient-based feature selection works on
/// them; RBF fits keep the support samples.
inline ModelFit fit_svr(const Matrix& x, const Vector& y, const Hyperparams& h, SvrKernel kernel) {
    detail::check_xy(x, y);
    h.validate();
    const std::size_t n = x.rows();

    Matrix k(n, n);
    if (kernel == SvrKernel::linear) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto ri = x.row(i);
            for (std::size_t j = i; j < n; ++j) {
                const auto rj = x.row(j);
                double s = 0.0;
                for (std::size_t m = 0; m < x.cols(); ++m) s += ri[m] * rj[m];
                k(i, j) = s;
                k(j, i) = s;
            }
        }
    } else {
        const Matrix d = pairwise_sq_dist(x);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) k(i, j) = std::exp(-h.rbf_gamma * d(i, j));
    }

    const SvrSolution sol = solve_svr_dual(k, y, h.svr_c, h.svr_epsilon);

    ModelFit m;
    m.params = h;
    m.n_features = x.cols();
    m.diagnostics.converged = sol.converged;
    m.diagnostics.iterations = sol.iterations;

    if (kernel == SvrKernel::linear) {
        m.kind = ModelKind::svr_linear;
        LinearState st;
        st.intercept = sol.bias;
        st.coef.assign(x.cols(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (sol.delta[i] == 0.0) continue;
            for (std::size_t j = 0; j < x.cols(); ++j) st.coef[j] += sol.delta[i] * x(i, j);
        }
        m.state = std::move(st);
    } else {
        m.kind = ModelKind::svr_rbf;
        SvrRbfState st;
        st.bias = sol.bias;
        st.gamma = h.rbf_gamma;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(sol.delta[i]) > 1e-12) keep.push_back(i);
        }
        st.support_x = Matrix(keep.size(), x.cols());
        st.dual_coef.resize(keep.size());
        for (std::size_t r = 0; r < keep.size(); ++r) {
            for (std::size_t j = 0; j < x.cols(); ++j) st.support_x(r, j) = x(keep[r], j);
            st.dual_coef[r] = sol.delta[keep[r]];
        }
        m.state = std::move(st);
    }
    return m;
}

}  // namespace riskpipe

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskpipe/dataset.hpp"
#include "riskpipe/matrix.hpp"

namespace riskpipe {

enum class ModelKind { knn, ols, lasso, ridge, svr_linear, svr_rbf, tree, forest };

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::knn: return "knn";
        case ModelKind::ols: return "ols";
        case ModelKind::lasso: return "lasso";
        case ModelKind::ridge: return "ridge";
        case ModelKind::svr_linear: return "svr_linear";
        case ModelKind::svr_rbf: return "svr_rbf";
        case ModelKind::tree: return "tree";
        case ModelKind::forest: return "forest";
    }
    return "unknown";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    for (ModelKind k : {ModelKind::knn, ModelKind::ols, ModelKind::lasso, ModelKind::ridge,
                        ModelKind::svr_linear, ModelKind::svr_rbf, ModelKind::tree,
                        ModelKind::forest}) {
        if (s == to_string(k)) return k;
    }
    throw ArgumentError("unknown model kind: " + s);
}

inline bool is_linear_kind(ModelKind k) {
    return k == ModelKind::ols || k == ModelKind::lasso || k == ModelKind::ridge ||
           k == ModelKind::svr_linear;
}

inline std::vector<ModelKind> all_model_kinds() {
    return {ModelKind::knn,        ModelKind::ols,     ModelKind::lasso, ModelKind::ridge,
            ModelKind::svr_linear, ModelKind::svr_rbf, ModelKind::tree,  ModelKind::forest};
}

struct Hyperparams {
    std::size_t knn_k = 5;
    double alpha = 1.0;          ///< lasso/ridge regularization penalty factor
    double svr_c = 1.0;
    double svr_epsilon = 0.1;
    double rbf_gamma = 1.0 / 28.0;
    std::optional<std::size_t> tree_max_depth;  ///< nullopt = unbounded
    std::size_t tree_min_leaf = 1;
    std::size_t forest_n_trees = 100;
    std::uint64_t forest_seed = 0;
    bool forest_bootstrap = true;
    std::size_t forest_features = 0;  ///< 0 = round(sqrt(n_features))

    void validate() const {
        if (knn_k < 1) throw ArgumentError("knn_k must be >= 1");
        if (alpha < 0.0) throw ArgumentError("alpha must be >= 0");
        if (svr_c <= 0.0) throw ArgumentError("svr_c must be > 0");
        if (svr_epsilon < 0.0) throw ArgumentError("svr_epsilon must be >= 0");
        if (rbf_gamma <= 0.0) throw ArgumentError("rbf_gamma must be > 0");
        if (tree_min_leaf < 1) throw ArgumentError("tree_min_leaf must be >= 1");
        if (forest_n_trees < 1) throw ArgumentError("forest_n_trees must be >= 1");
    }
};

struct FitDiagnostics {
    bool converged = true;
    std::size_t iterations = 0;
};

struct KnnState {
    Matrix x;
    Vector y;
};

struct LinearState {
    double intercept = 0.0;
    Vector coef;
};

struct SvrRbfState {
    Matrix support_x;
    Vector dual_coef;  ///< delta_i for each kept support sample
    double bias = 0.0;
    double gamma = 0.0;
};

struct TreeNode {
    int left = -1;   ///< child indices; -1 marks a leaf
    int right = -1;
    std::size_t feature = 0;
    double threshold = 0.0;
    double value = 0.0;       ///< leaf prediction (mean of samples)
    std::size_t n_samples = 0;
    double gain = 0.0;        ///< SSE reduction achieved by this split
    bool is_leaf() const { return left < 0; }
};

struct TreeState {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    std::size_t n_features = 0;
};

struct ForestState {
    std::vector<TreeState> trees;
    std::size_t n_features = 0;
};

/// A trained regression model of any of the eight kinds.
struct ModelFit {
    ModelKind kind = ModelKind::ols;
    Hyperparams params;
    std::size_t n_features = 0;
    FitDiagnostics diagnostics;
    std::variant<KnnState, LinearState, SvrRbfState, TreeState, ForestState> state;

    bool has_coefficients() const { return is_linear_kind(kind); }

    const Vector& coefficients() const& {
        if (!has_coefficients()) {
            throw UnsupportedModelError(std::string("model kind '") + to_string(kind) +
                                        "' exposes no coefficients");
        }
        return std::get<LinearState>(state).coef;
    }

    // rvalue access must not hand out a reference into a dying temporary
    Vector coefficients() && {
        return static_cast<const ModelFit&>(*this).coefficients();
    }

    double intercept() const { return std::get<LinearState>(state).intercept; }
};

namespace detail {

inline void check_xy(const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) throw ShapeError("x rows != y length");
    if (x.rows() == 0) throw InsufficientDataError("empty training set");
}

struct Centered {
    Matrix xc;
    Vector yc;
    Vector x_means;
    double y_mean = 0.0;
};

inline Centered center_xy(const Matrix& x, const Vector& y) {
    Centered c;
    c.xc = x;
    c.yc = y;
    c.x_means.assign(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) m += x(i, j);
        m /= static_cast<double>(x.rows());
        c.x_means[j] = m;
        for (std::size_t i = 0; i < x.rows(); ++i) c.xc(i, j) -= m;
    }
    c.y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    for (double& v : c.yc) v -= c.y_mean;
    return c;
}

inline Matrix gram(const Matrix& xc) {
    const std::size_t p = xc.cols();
    Matrix g(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = j; k < p; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < xc.rows(); ++i) s += xc(i, j) * xc(i, k);
            g(j, k) = s;
            g(k, j) = s;
        }
    }
    return g;
}

inline Vector xty(const Matrix& xc, const Vector& yc) {
    Vector v(xc.cols(), 0.0);
    for (std::size_t j = 0; j < xc.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < xc.rows(); ++i) s += xc(i, j) * yc[i];
        v[j] = s;
    }
    return v;
}

/// Solve (g + ridge*I) beta = rhs; retries once with a 1e-10 jitter when the
/// Cholesky hits a non-positive pivot.
inline Vector solve_normal_equations(Matrix g, const Vector& rhs, double ridge) {
    for (std::size_t j = 0; j < g.rows(); ++j) g(j, j) += ridge;
    try {
        return solve_spd(g, rhs);
    } catch (const SingularError&) {
        for (std::size_t j = 0; j < g.rows(); ++j) g(j, j) += 1e-10;
        return solve_spd(g, rhs);
    }
}

inline ModelFit make_linear_fit(ModelKind kind, const Hyperparams& h, const Centered& c,
                                Vector beta, FitDiagnostics diag = {}) {
    ModelFit m;
    m.kind = kind;
    m.params = h;
    m.n_features = c.x_means.size();
    m.diagnostics = diag;
    LinearState st;
    st.intercept = c.y_mean;
    for (std::size_t j = 0; j < beta.size(); ++j) st.intercept -= beta[j] * c.x_means[j];
    st.coef = std::move(beta);
    m.state = std::move(st);
    return m;
}

inline double tree_predict_row(const TreeState& t, std::span<const double> row) {
    int idx = 0;
    while (!t.nodes[idx].is_leaf()) {
        const TreeNode& nd = t.nodes[idx];
        idx = (row[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return t.nodes[idx].value;
}

}  // namespace detail

/// Nearest-neighbor regression: training just stores the data.
inline ModelFit fit_knn(const Matrix& x, const Vector& y, const Hyperparams& h) {
    detail::check_xy(x, y);
    h.validate();
    if (h.knn_k > x.rows()) {
        throw ArgumentError("knn_k = " + std::to_string(h.knn_k) + " exceeds sample count " +
                            std::to_string(x.rows()));
    }
    ModelFit m;
    m.kind = ModelKind::knn;
    m.params = h;
    m.n_features = x.cols();
    m.state = KnnState{x, y};
    return m;
}

/// Ordinary least squares via the normal equations (Cholesky, jitter fallback).
inline ModelFit fit_ols(const Matrix& x, const Vector& y) {
    detail::check_xy(x, y);
    if (x.rows() < 2) throw InsufficientDataError("fit_ols requires at least 2 rows");
    const auto c = detail::center_xy(x, y);
    Vector beta = detail::solve_normal_equations(detail::gram(c.xc), detail::xty(c.xc, c.yc), 0.0);
    return detail::make_linear_fit(ModelKind::ols, Hyperparams{}, c, std::move(beta));
}

/// Ridge regression: (Xc'Xc + alpha I) beta = Xc'y, intercept unpenalized.
inline ModelFit fit_ridge(const Matrix& x, const Vector& y, const Hyperparams& h) {
    detail::check_xy(x, y);
    if (h.alpha < 0.0) throw ArgumentError("ridge alpha must be >= 0");
    if (x.rows() < 2) throw InsufficientDataError("fit_ridge requires at least 2 rows");
    const auto c = detail::center_xy(x, y);
    Vector beta =
        detail::solve_normal_equations(detail::gram(c.xc), detail::xty(c.xc, c.yc), h.alpha);
    return detail::make_linear_fit(ModelKind::ridge, h, c, std::move(beta));
}

/// Smallest alpha at which lasso returns the all-zero coefficient vector,
/// max_j |x_j . y| / N on centered data.
inline double lasso_alpha_max(const Matrix& x, const Vector& y) {
    detail::check_xy(x, y);
    const auto c = detail::center_xy(x, y);
    const Vector v = detail::xty(c.xc, c.yc);
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m / static_cast<double>(x.rows());
}

/// Lasso via cyclic coordinate descent with soft-thresholding.
/// Objective: (1/2N) ||y - X beta||^2 + alpha ||beta||_1 on centered data.
/// Intended for standardized features. Stops when the largest coordinate
/// change in a sweep drops below 1e-7 (cap 10^4 sweeps; non-convergence is a
/// diagnostics flag, not an error).
///
/// Works on the Gram matrix ("covariance updates"): the coordinate
/// correlation is kept as xty_j - (G beta)_j, which both makes each update
/// O(p) and keeps the alpha >= alpha_max => beta = 0 identity exact, because
/// the zero-beta correlations are the very numbers lasso_alpha_max computes.
inline ModelFit fit_lasso(const Matrix& x, const Vector& y, const Hyperparams& h) {
    detail::check_xy(x, y);
    if (h.alpha < 0.0) throw ArgumentError("lasso alpha must be >= 0");
    if (x.rows() < 2) throw InsufficientDataError("fit_lasso requires at least 2 rows");

    const auto c = detail::center_xy(x, y);
    const std::size_t p = x.cols();
    const double nn = static_cast<double>(x.rows());

    const Matrix g = detail::gram(c.xc);
    const Vector v = detail::xty(c.xc, c.yc);

    Vector beta(p, 0.0);
    Vector gb(p, 0.0);  // G beta, maintained incrementally
    constexpr double kTol = 1e-7;
    constexpr std::size_t kMaxSweeps = 10000;

    FitDiagnostics diag;
    diag.converged = false;
    std::size_t sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double col_sq = g(j, j) / nn;
            if (col_sq == 0.0) continue;
            const double old = beta[j];
            const double rho = (v[j] - gb[j]) / nn + col_sq * old;
            const double mag = std::abs(rho) - h.alpha;
            const double next = mag > 0.0 ? std::copysign(mag, rho) / col_sq : 0.0;
            const double delta = next - old;
            if (delta != 0.0) {
                for (std::size_t k = 0; k < p; ++k) gb[k] += g(k, j) * delta;
                beta[j] = next;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        if (max_change < kTol) {
            diag.converged = true;
            ++sweep;
            break;
        }
    }
    diag.iterations = sweep;
    return detail::make_linear_fit(ModelKind::lasso, h, c, std::move(beta), diag);
}

/// Per-row prediction for any fitted model.
inline Vector predict(const ModelFit& m, const Matrix& x) {
    if (x.cols() != m.n_features) {
        throw ShapeError("predict: input has " + std::to_string(x.cols()) +
                         " features, model was trained on " + std::to_string(m.n_features));
    }
    Vector out(x.rows(), 0.0);

    if (const auto* knn = std::get_if<KnnState>(&m.state)) {
        const std::size_t n = knn->x.rows();
        const std::size_t k = m.params.knn_k;
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t q = 0; q < x.rows(); ++q) {
            const auto row = x.row(q);
            for (std::size_t i = 0; i < n; ++i) {
                const auto tr = knn->x.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < x.cols(); ++j) {
                    const double d = row[j] - tr[j];
                    s += d * d;
                }
                dist[i] = {s, i};  // index as tie-break
            }
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            double mean = 0.0;
            for (std::size_t i = 0; i < k; ++i) mean += knn->y[dist[i].second];
            out[q] = mean / static_cast<double>(k);
        }
    } else if (const auto* lin = std::get_if<LinearState>(&m.state)) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double s = lin->intercept;
            const auto row = x.row(i);
            for (std::size_t j = 0; j < x.cols(); ++j) s += lin->coef[j] * row[j];
            out[i] = s;
        }
    } else if (const auto* svr = std::get_if<SvrRbfState>(&m.state)) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const auto row = x.row(i);
            double s = svr->bias;
            for (std::size_t v = 0; v < svr->support_x.rows(); ++v) {
                const auto sv = svr->support_x.row(v);
                double d = 0.0;
                for (std::size_t j = 0; j < x.cols(); ++j) {
                    const double diff = row[j] - sv[j];
                    d += diff * diff;
                }
                s += svr->dual_coef[v] * std::exp(-svr->gamma * d);
            }
            out[i] = s;
        }
    } else if (const auto* tree = std::get_if<TreeState>(&m.state)) {
        for (std::size_t i = 0; i < x.rows(); ++i)
            out[i] = detail::tree_predict_row(*tree, x.row(i));
    } else if (const auto* forest = std::get_if<ForestState>(&m.state)) {
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double s = 0.0;
            for (const auto& t : forest->trees) s += detail::tree_predict_row(t, x.row(i));
            out[i] = s / static_cast<double>(forest->trees.size());
        }
    }

    for (double v : out) {
        if (!std::isfinite(v)) throw Error("predict produced a non-finite value");
    }
    return out;
}

namespace detail {

/// Index split used by the tuners: seeded shuffle, last fifth for validation.
struct TuneSplit {
    Matrix x_fit, x_val;
    Vector y_fit, y_val;
};

inline TuneSplit tune_split(const Matrix& x, const Vector& y, std::uint64_t seed) {
    const std::size_t n = x.rows();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    std::size_t val_n = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n))), 1, n - 1);

    TuneSplit s;
    s.x_val = Matrix(val_n, x.cols());
    s.y_val.resize(val_n);
    s.x_fit = Matrix(n - val_n, x.cols());
    s.y_fit.resize(n - val_n);
    for (std::size_t r = 0; r < val_n; ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j) s.x_val(r, j) = x(idx[r], j);
        s.y_val[r] = y[idx[r]];
    }
    for (std::size_t r = val_n; r < n; ++r) {
        for (std::size_t j = 0; j < x.cols(); ++j) s.x_fit(r - val_n, j) = x(idx[r], j);
        s.y_fit[r - val_n] = y[idx[r]];
    }
    return s;
}

inline double validation_mae(const ModelFit& m, const TuneSplit& s) {
    const Vector pred = predict(m, s.x_val);
    double e = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) e += std::abs(pred[i] - s.y_val[i]);
    return e / static_cast<double>(pred.size());
}

}  // namespace detail

/// Candidate neighbor counts centered on round(sqrt(28)) = 5.
inline std::vector<std::size_t> default_knn_candidates() { return {1, 2, 3, 5, 7, 10, 15}; }

/// Log-scale regularization grid.
inline std::vector<double> default_alpha_candidates() {
    return {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
}

/// Pick the k minimizing validation MAE on an internal seeded 80/20 split.
/// Candidates larger than the fit partition are skipped.
inline Hyperparams tune_knn(const Matrix& x, const Vector& y,
                            const std::vector<std::size_t>& candidates, std::uint64_t split_seed,
                            Hyperparams base = {}) {
    detail::check_xy(x, y);
    if (candidates.empty()) throw ArgumentError("tune_knn: no candidates");
    const auto s = detail::tune_split(x, y, split_seed);

    double best_mae = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k : candidates) {
        if (k < 1 || k > s.x_fit.rows()) continue;
        Hyperparams h = base;
        h.knn_k = k;
        const double mae = detail::validation_mae(fit_knn(s.x_fit, s.y_fit, h), s);
        if (mae < best_mae) {
            best_mae = mae;
            best_k = k;
        }
    }
    if (best_k == 0) throw ArgumentError("tune_knn: every candidate exceeded the fit partition");
    base.knn_k = best_k;
    return base;
}

/// Pick the lasso/ridge alpha minimizing validation MAE on an internal
/// seeded 80/20 split.
inline Hyperparams tune_alpha(const Matrix& x, const Vector& y, ModelKind kind,
                              const std::vector<double>& alphas, std::uint64_t split_seed,
                              Hyperparams base = {}) {
    detail::check_xy(x, y);
    if (kind != ModelKind::lasso && kind != ModelKind::ridge) {
        throw UnsupportedModelError("tune_alpha supports lasso and ridge only");
    }
    if (alphas.empty()) throw ArgumentError("tune_alpha: no candidates");
    const auto s = detail::tune_split(x, y, split_seed);

    double best_mae = std::numeric_limits<double>::infinity();
    double best_alpha = alphas.front();
    for (double a : alphas) {
        Hyperparams h = base;
        h.alpha = a;
        const ModelFit m = (kind == ModelKind::lasso) ? fit_lasso(s.x_fit, s.y_fit, h)
                                                      : fit_ridge(s.x_fit, s.y_fit, h);
        const double mae = detail::validation_mae(m, s);
        if (mae < best_mae) {
            best_mae = mae;
            best_alpha = a;
        }
    }
    base.alpha = best_alpha;
    return base;
}

}  // namespace riskpipe

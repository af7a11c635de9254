#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskpipe/regress.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {
namespace detail {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse_after = 0.0;
};

/// Best greedy split over the given features: minimizes the summed child SSE.
/// Ties resolve to the lowest feature index, then the smallest threshold
/// (features and thresholds are scanned in ascending order and a candidate
/// only wins on strict improvement).
inline SplitChoice best_split(const Matrix& x, const Vector& y,
                              const std::vector<std::size_t>& samples,
                              const std::vector<std::size_t>& features, std::size_t min_leaf) {
    const std::size_t n = samples.size();
    SplitChoice best;
    best.sse_after = std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, double>> vals(n);  // (feature value, y)
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < n; ++i) {
            vals[i] = {x(samples[i], f), y[samples[i]]};
        }
        std::sort(vals.begin(), vals.end());

        double sum_r = 0.0, sq_r = 0.0;
        for (const auto& [v, t] : vals) {
            sum_r += t;
            sq_r += t * t;
        }
        double sum_l = 0.0, sq_l = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double t = vals[i].second;
            sum_l += t;
            sq_l += t * t;
            sum_r -= t;
            sq_r -= t * t;
            if (vals[i].first == vals[i + 1].first) continue;  // no boundary here
            const std::size_t nl = i + 1, nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double sse = (sq_l - sum_l * sum_l / static_cast<double>(nl)) +
                               (sq_r - sum_r * sum_r / static_cast<double>(nr));
            if (sse < best.sse_after) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                best.sse_after = sse;
            }
        }
    }
    return best;
}

struct TreeBuildConfig {
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 1;
    std::size_t feature_subsample = 0;  ///< 0 = all features
};

inline int build_tree_node(TreeState& t, const Matrix& x, const Vector& y,
                           std::vector<std::size_t>& samples, std::size_t depth,
                           const TreeBuildConfig& cfg, Rng* rng) {
    const std::size_t n = samples.size();
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : samples) {
        sum += y[i];
        sq += y[i] * y[i];
    }
    const double mean = sum / static_cast<double>(n);
    const double sse = sq - sum * sum / static_cast<double>(n);

    TreeNode node;
    node.value = mean;
    node.n_samples = n;
    const int idx = static_cast<int>(t.nodes.size());
    t.nodes.push_back(node);

    const bool depth_ok = !cfg.max_depth || depth < *cfg.max_depth;
    if (!depth_ok || n < 2 * cfg.min_leaf || sse <= 1e-12) return idx;

    std::vector<std::size_t> features(x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) features[j] = j;
    if (cfg.feature_subsample > 0 && cfg.feature_subsample < x.cols() && rng) {
        // partial Fisher-Yates, then sort so tie-breaks stay index-ordered
        for (std::size_t i = 0; i < cfg.feature_subsample; ++i) {
            const std::size_t j = i + rng->index(features.size() - i);
            std::swap(features[i], features[j]);
        }
        features.resize(cfg.feature_subsample);
        std::sort(features.begin(), features.end());
    }

    const SplitChoice split = best_split(x, y, samples, features, cfg.min_leaf);
    if (!split.found || sse - split.sse_after <= 1e-12) return idx;

    std::vector<std::size_t> left, right;
    left.reserve(n);
    right.reserve(n);
    for (std::size_t i : samples) {
        (x(i, split.feature) <= split.threshold ? left : right).push_back(i);
    }
    samples.clear();
    samples.shrink_to_fit();

    const int l = build_tree_node(t, x, y, left, depth + 1, cfg, rng);
    const int r = build_tree_node(t, x, y, right, depth + 1, cfg, rng);
    t.nodes[idx].left = l;
    t.nodes[idx].right = r;
    t.nodes[idx].feature = split.feature;
    t.nodes[idx].threshold = split.threshold;
    t.nodes[idx].gain = sse - split.sse_after;
    return idx;
}

inline TreeState build_tree(const Matrix& x, const Vector& y, std::vector<std::size_t> samples,
                            const TreeBuildConfig& cfg, Rng* rng) {
    TreeState t;
    t.n_features = x.cols();
    build_tree_node(t, x, y, samples, 0, cfg, rng);
    return t;
}

inline void accumulate_tree_gains(const TreeState& t, Vector& gains) {
    for (const TreeNode& nd : t.nodes) {
        if (!nd.is_leaf()) gains[nd.feature] += nd.gain;
    }
}

}  // namespace detail

/// Greedy binary CART regression tree minimizing child SSE at each split.
inline ModelFit fit_tree(const Matrix& x, const Vector& y, const Hyperparams& h) {
    detail::check_xy(x, y);
    h.validate();
    detail::TreeBuildConfig cfg{h.tree_max_depth, h.tree_min_leaf, 0};
    std::vector<std::size_t> all(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) all[i] = i;

    ModelFit m;
    m.kind = ModelKind::tree;
    m.params = h;
    m.n_features = x.cols();
    m.state = detail::build_tree(x, y, std::move(all), cfg, nullptr);
    return m;
}

/// Bootstrap ensemble of CART trees with per-split feature subsampling
/// (round(sqrt(d)) features unless overridden). Tree t draws all of its
/// randomness from seed forest_seed + t.
inline ModelFit fit_forest(const Matrix& x, const Vector& y, const Hyperparams& h) {
    detail::check_xy(x, y);
    h.validate();
    const std::size_t n = x.rows();

    std::size_t m_features = h.forest_features;
    if (m_features == 0) {
        m_features = static_cast<std::size_t>(
            std::llround(std::sqrt(static_cast<double>(x.cols()))));
        m_features = std::clamp<std::size_t>(m_features, 1, x.cols());
    }
    detail::TreeBuildConfig cfg{h.tree_max_depth, h.tree_min_leaf,
                                m_features >= x.cols() ? 0 : m_features};

    ForestState forest;
    forest.n_features = x.cols();
    forest.trees.reserve(h.forest_n_trees);
    for (std::size_t t = 0; t < h.forest_n_trees; ++t) {
        Rng rng(h.forest_seed + t);
        std::vector<std::size_t> samples(n);
        if (h.forest_bootstrap) {
            for (std::size_t i = 0; i < n; ++i) samples[i] = rng.index(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) samples[i] = i;
        }
        forest.trees.push_back(detail::build_tree(x, y, std::move(samples), cfg, &rng));
    }

    ModelFit m;
    m.kind = ModelKind::forest;
    m.params = h;
    m.n_features = x.cols();
    m.state = std::move(forest);
    return m;
}

/// Importance scores per feature, normalized to sum 1.
/// Linear kinds use |coefficient|; tree/forest use total SSE reduction
/// contributed by splits on the feature.
inline Vector feature_importances(const ModelFit& m) {
    Vector imp(m.n_features, 0.0);
    if (m.has_coefficients()) {
        const Vector& c = m.coefficients();
        for (std::size_t j = 0; j < c.size(); ++j) imp[j] = std::abs(c[j]);
    } else if (const auto* tree = std::get_if<TreeState>(&m.state)) {
        detail::accumulate_tree_gains(*tree, imp);
    } else if (const auto* forest = std::get_if<ForestState>(&m.state)) {
        for (const auto& t : forest->trees) detail::accumulate_tree_gains(t, imp);
    } else {
        throw UnsupportedModelError(std::string("model kind '") + to_string(m.kind) +
                                    "' has no importance measure");
    }
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
        for (double& v : imp) v /= total;
    }
    return imp;
}

}  // namespace riskpipe

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "riskpipe/models.hpp"

namespace riskpipe {

struct RankedFeature {
    std::string name;
    double score = 0.0;
    std::size_t rank = 0;  ///< 1 = most important
};

struct FeatureRanking {
    std::vector<RankedFeature> entries;  ///< sorted by rank ascending
    std::string method;                  ///< "coefficients" or "rfe"
    ModelKind model_kind = ModelKind::ols;
};

/// Rank features of a linear fit by |coefficient| descending; ties resolve to
/// the lower feature index.
inline FeatureRanking rank_by_coefficients(const ModelFit& m,
                                           const std::vector<std::string>& feature_names) {
    if (!m.has_coefficients()) {
        throw UnsupportedModelError(std::string("rank_by_coefficients: kind '") +
                                    to_string(m.kind) + "' has no coefficients");
    }
    const Vector& coef = m.coefficients();
    if (coef.size() != feature_names.size()) {
        throw ShapeError("rank_by_coefficients: name count mismatch");
    }

    std::vector<std::size_t> order(coef.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(coef[a]) > std::abs(coef[b]);
    });

    FeatureRanking r;
    r.method = "coefficients";
    r.model_kind = m.kind;
    r.entries.reserve(coef.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        r.entries.push_back({feature_names[order[pos]], std::abs(coef[order[pos]]), pos + 1});
    }
    return r;
}

/// Recursive feature elimination: refit on the surviving features and drop
/// the single least-important one until n_target remain.
///
/// Survivors get ranks 1..n_target from the final fit's importances; the
/// eliminated features rank behind them in reverse elimination order (the
/// feature dropped first ranks last). Ties on the minimum importance drop
/// the largest feature index.
inline FeatureRanking rfe(ModelKind kind, const Hyperparams& h, const Dataset& d,
                          std::size_t n_target) {
    if (kind == ModelKind::knn || kind == ModelKind::svr_rbf) {
        throw UnsupportedModelError(std::string("rfe: kind '") + to_string(kind) +
                                    "' has no importance measure");
    }
    const std::size_t p = d.x.cols();
    if (n_target < 1 || n_target > p) throw ArgumentError("rfe: n_target out of range");
    if (d.schema.feature_names.size() != p) throw SchemaError("rfe: schema does not name every column");

    std::vector<std::size_t> surviving(p);
    for (std::size_t j = 0; j < p; ++j) surviving[j] = j;
    std::vector<std::size_t> eliminated;  // in elimination order

    ModelFit fit = fit_model(kind, d.x, d.y, h);
    while (surviving.size() > n_target) {
        const Vector imp = feature_importances(fit);
        std::size_t worst = 0;
        for (std::size_t j = 1; j < surviving.size(); ++j) {
            if (imp[j] <= imp[worst]) worst = j;  // <= so ties drop the larger index
        }
        eliminated.push_back(surviving[worst]);
        surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(worst));
        fit = fit_model(kind, d.x.select_cols(surviving), d.y, h);
    }

    const Vector final_imp = feature_importances(fit);
    std::vector<std::size_t> order(surviving.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return final_imp[a] > final_imp[b]; });

    FeatureRanking r;
    r.method = "rfe";
    r.model_kind = kind;
    r.entries.reserve(p);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        r.entries.push_back(
            {d.schema.feature_names[surviving[order[pos]]], final_imp[order[pos]], pos + 1});
    }
    for (std::size_t e = eliminated.size(); e-- > 0;) {
        r.entries.push_back({d.schema.feature_names[eliminated[e]], 0.0, r.entries.size() + 1});
    }
    return r;
}

}  // namespace riskpipe

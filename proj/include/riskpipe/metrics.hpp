#pragma once

#include <algorithm>
#include <cmath>

#include "riskpipe/dataset.hpp"
#include "riskpipe/regress.hpp"

namespace riskpipe {

struct EvalResult {
    double mae = 0.0;
    double mse = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

namespace detail {
inline void check_pair(const Vector& pred, const Vector& truth) {
    if (pred.size() != truth.size()) throw ShapeError("metric: length mismatch");
    if (pred.empty()) throw InsufficientDataError("metric: empty vectors");
}
}  // namespace detail

/// Mean of |prediction - truth|.
inline double mae(const Vector& pred, const Vector& truth) {
    detail::check_pair(pred, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

/// Mean of (prediction - truth)^2.
inline double mse(const Vector& pred, const Vector& truth) {
    detail::check_pair(pred, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

/// Coefficient of determination, 1 - SSres/SStot. Undefined for constant truth.
inline double r2(const Vector& pred, const Vector& truth) {
    detail::check_pair(pred, truth);
    if (pred.size() < 2) throw InsufficientDataError("r2 requires at least 2 samples");
    const auto [mn, mx] = std::minmax_element(truth.begin(), truth.end());
    if (*mn == *mx) throw UndefinedMetricError("r2 undefined for constant truth");

    double mean = 0.0;
    for (double t : truth) mean += t;
    mean /= static_cast<double>(truth.size());

    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = truth[i] - pred[i];
        const double c = truth[i] - mean;
        ss_res += r * r;
        ss_tot += c * c;
    }
    return 1.0 - ss_res / ss_tot;
}

/// All three test-set metrics for a fitted model.
inline EvalResult evaluate(const ModelFit& m, const Dataset& test) {
    if (test.n() == 0) throw InsufficientDataError("evaluate: empty test set");
    const Vector pred = predict(m, test.x);
    EvalResult r;
    r.mae = mae(pred, test.y);
    r.mse = mse(pred, test.y);
    r.r2 = r2(pred, test.y);
    r.n = test.n();
    return r;
}

}  // namespace riskpipe

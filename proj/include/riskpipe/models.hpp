#pragma once

#include "riskpipe/regress.hpp"
#include "riskpipe/svr.hpp"
#include "riskpipe/tree.hpp"

namespace riskpipe {

/// Fit any of the eight model kinds with the given hyperparameters.
inline ModelFit fit_model(ModelKind kind, const Matrix& x, const Vector& y,
                          const Hyperparams& h) {
    switch (kind) {
        case ModelKind::knn: return fit_knn(x, y, h);
        case ModelKind::ols: return fit_ols(x, y);
        case ModelKind::lasso: return fit_lasso(x, y, h);
        case ModelKind::ridge: return fit_ridge(x, y, h);
        case ModelKind::svr_linear: return fit_svr(x, y, h, SvrKernel::linear);
        case ModelKind::svr_rbf: return fit_svr(x, y, h, SvrKernel::rbf);
        case ModelKind::tree: return fit_tree(x, y, h);
        case ModelKind::forest: return fit_forest(x, y, h);
    }
    throw ArgumentError("fit_model: unknown kind");
}

}  // namespace riskpipe

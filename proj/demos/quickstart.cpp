// Minimal library walkthrough: generate data, fit two models, embed, cluster.

#include <cstdio>

#include "riskpipe/riskpipe.hpp"

int main() {
    using namespace riskpipe;

    Dataset raw = generate_synthetic(300, 42);
    auto [data, scaler] = standardize(raw);
    Split split = train_test_split(data, 0.1, 42);

    ModelFit linear = fit_ols(split.train.x, split.train.y);
    ModelFit forest = fit_forest(split.train.x, split.train.y, Hyperparams{});

    const EvalResult el = evaluate(linear, split.test);
    const EvalResult ef = evaluate(forest, split.test);
    std::printf("linear regression: MAE %.4f  MSE %.4f  R2 %.4f\n", el.mae, el.mse, el.r2);
    std::printf("random forest:     MAE %.4f  MSE %.4f  R2 %.4f\n", ef.mae, ef.mse, ef.r2);

    FeatureRanking top = rank_by_coefficients(linear, data.schema.feature_names);
    std::printf("strongest linear feature: %s\n", top.entries.front().name.c_str());

    Embedding pca = pca_transform(pca_fit(data.x), data.x);
    Clustering clusters = kmeans(pca.points, 2, 42);
    std::printf("PCA k=2 silhouette: %.4f\n", silhouette(pca.points, clusters.labels));
    return 0;
}

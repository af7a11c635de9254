#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "riskpipe/model_io.hpp"
#include "test_helpers.hpp"

using namespace riskpipe;

TEST_CASE("every model kind round-trips through JSON with identical predictions",
          "[regress][io]") {
    Rng rng(91);
    const Matrix x = testutil::random_matrix(rng, 25, 4);
    Vector y(25);
    for (std::size_t i = 0; i < 25; ++i) y[i] = std::sin(x(i, 0)) + 0.5 * x(i, 2);
    const Matrix probe = testutil::random_matrix(rng, 10, 4);

    Hyperparams h;
    h.knn_k = 3;
    h.alpha = 0.05;
    h.forest_n_trees = 5;
    h.forest_seed = 3;

    for (ModelKind kind : all_model_kinds()) {
        const ModelFit original = fit_model(kind, x, y, h);
        const nlohmann::json j = model_to_json(original);
        CHECK(j.at("version").get<int>() == kModelFormatVersion);
        CHECK(j.at("kind").get<std::string>() == to_string(kind));

        const ModelFit restored = model_from_json(j);
        CHECK(restored.kind == original.kind);
        CHECK(restored.n_features == original.n_features);
        const Vector a = predict(original, probe);
        const Vector b = predict(restored, probe);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}

TEST_CASE("model files save and load through the filesystem", "[regress][io]") {
    Rng rng(92);
    const Matrix x = testutil::random_matrix(rng, 20, 3);
    const Vector y = testutil::random_vector(rng, 20);
    const ModelFit m = fit_ols(x, y);

    const auto path = std::filesystem::temp_directory_path() / "riskpipe_model.json";
    save_model(m, path);
    const ModelFit back = load_model(path);
    CHECK(back.kind == ModelKind::ols);
    CHECK(back.coefficients() == m.coefficients());
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_model("/nonexistent/riskpipe.json"), IoError);
}

TEST_CASE("version mismatches are rejected", "[regress][io]") {
    Rng rng(93);
    const Matrix x = testutil::random_matrix(rng, 10, 2);
    const Vector y = testutil::random_vector(rng, 10);
    nlohmann::json j = model_to_json(fit_ols(x, y));
    j["version"] = 999;
    CHECK_THROWS_AS(model_from_json(j), ParseError);
}

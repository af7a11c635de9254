#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskpipe/regress.hpp"
#include "riskpipe/tsne.hpp"

namespace riskpipe {

/// Plain-text run configuration: one `key=value` per line, `#` comments and
/// blank lines allowed. Keys mirror the CLI long-flag names; command-line
/// flags take precedence over file values.
inline std::map<std::string, std::string> parse_key_value_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + " is not key=value: '" +
                             stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty()) throw ParseError("empty key at config line " + std::to_string(lineno));
        out[key] = trim(stripped.substr(eq + 1));
    }
    return out;
}

/// Everything a pipeline run depends on. Defaults reproduce the full
/// workflow on the bundled synthetic dataset.
struct PipelineConfig {
    std::string input_path;         ///< empty = use the synthetic generator
    std::size_t synthetic_n = 991;
    double test_fraction = 0.1;
    std::uint64_t seed = 7;
    std::string out_dir = "out";

    std::vector<ModelKind> models = all_model_kinds();

    // hyperparameter overrides; unset means tune (knn/lasso/ridge) or default
    std::optional<std::size_t> knn_k;
    std::optional<double> lasso_alpha;
    std::optional<double> ridge_alpha;
    double svr_c = 1.0;
    double svr_epsilon = 0.1;
    std::optional<double> rbf_gamma;  ///< default 1 / n_features
    std::optional<std::size_t> tree_max_depth;
    std::size_t tree_min_leaf = 1;
    std::size_t forest_n_trees = 100;

    std::size_t rfe_target = 2;
    std::vector<ModelKind> rfe_models = {ModelKind::ols, ModelKind::svr_linear, ModelKind::forest};

    std::vector<double> tsne_perplexities = default_tsne_perplexities();
    std::vector<double> tsne_learning_rates = default_tsne_learning_rates();
    std::vector<std::size_t> tsne_iterations = default_tsne_iterations();

    std::size_t k_min = 2;
    std::size_t k_max = 10;
    std::size_t histogram_bins = 12;
    bool save_models = false;
    std::size_t threads = 0;  ///< 0 = hardware concurrency

    void validate() const {
        if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
            throw ArgumentError("test_fraction must lie in (0, 1)");
        }
        if (models.empty()) throw ArgumentError("config: no models selected");
        if (tsne_perplexities.empty() || tsne_learning_rates.empty() || tsne_iterations.empty()) {
            throw ArgumentError("config: t-SNE grids must be nonempty");
        }
        if (k_min < 2 || k_min > k_max) throw ArgumentError("config: need 2 <= k_min <= k_max");
        if (rfe_target < 1) throw ArgumentError("config: rfe_target must be >= 1");
        if (input_path.empty() && synthetic_n < 10) {
            throw ArgumentError("config: synthetic_n must be >= 10");
        }
        if (histogram_bins < 1) throw ArgumentError("config: histogram_bins must be >= 1");
    }
};

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["input_path"] = c.input_path;
    j["synthetic_n"] = c.synthetic_n;
    j["test_fraction"] = c.test_fraction;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    std::vector<std::string> models;
    for (ModelKind k : c.models) models.emplace_back(to_string(k));
    j["models"] = models;
    if (c.knn_k) j["knn_k"] = *c.knn_k;
    if (c.lasso_alpha) j["lasso_alpha"] = *c.lasso_alpha;
    if (c.ridge_alpha) j["ridge_alpha"] = *c.ridge_alpha;
    j["svr_c"] = c.svr_c;
    j["svr_epsilon"] = c.svr_epsilon;
    if (c.rbf_gamma) j["rbf_gamma"] = *c.rbf_gamma;
    if (c.tree_max_depth) j["tree_max_depth"] = *c.tree_max_depth;
    j["tree_min_leaf"] = c.tree_min_leaf;
    j["forest_n_trees"] = c.forest_n_trees;
    j["rfe_target"] = c.rfe_target;
    std::vector<std::string> rfe_models;
    for (ModelKind k : c.rfe_models) rfe_models.emplace_back(to_string(k));
    j["rfe_models"] = rfe_models;
    j["tsne_perplexities"] = c.tsne_perplexities;
    j["tsne_learning_rates"] = c.tsne_learning_rates;
    j["tsne_iterations"] = c.tsne_iterations;
    j["k_min"] = c.k_min;
    j["k_max"] = c.k_max;
    j["histogram_bins"] = c.histogram_bins;
    j["save_models"] = c.save_models;
    return j;
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.input_path = j.value("input_path", c.input_path);
    c.synthetic_n = j.value("synthetic_n", c.synthetic_n);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("models")) {
        c.models.clear();
        for (const auto& s : j.at("models")) c.models.push_back(model_kind_from_string(s));
    }
    if (j.contains("knn_k")) c.knn_k = j.at("knn_k").get<std::size_t>();
    if (j.contains("lasso_alpha")) c.lasso_alpha = j.at("lasso_alpha").get<double>();
    if (j.contains("ridge_alpha")) c.ridge_alpha = j.at("ridge_alpha").get<double>();
    c.svr_c = j.value("svr_c", c.svr_c);
    c.svr_epsilon = j.value("svr_epsilon", c.svr_epsilon);
    if (j.contains("rbf_gamma")) c.rbf_gamma = j.at("rbf_gamma").get<double>();
    if (j.contains("tree_max_depth")) c.tree_max_depth = j.at("tree_max_depth").get<std::size_t>();
    c.tree_min_leaf = j.value("tree_min_leaf", c.tree_min_leaf);
    c.forest_n_trees = j.value("forest_n_trees", c.forest_n_trees);
    c.rfe_target = j.value("rfe_target", c.rfe_target);
    if (j.contains("rfe_models")) {
        c.rfe_models.clear();
        for (const auto& s : j.at("rfe_models")) c.rfe_models.push_back(model_kind_from_string(s));
    }
    if (j.contains("tsne_perplexities"))
        c.tsne_perplexities = j.at("tsne_perplexities").get<std::vector<double>>();
    if (j.contains("tsne_learning_rates"))
        c.tsne_learning_rates = j.at("tsne_learning_rates").get<std::vector<double>>();
    if (j.contains("tsne_iterations"))
        c.tsne_iterations = j.at("tsne_iterations").get<std::vector<std::size_t>>();
    c.k_min = j.value("k_min", c.k_min);
    c.k_max = j.value("k_max", c.k_max);
    c.histogram_bins = j.value("histogram_bins", c.histogram_bins);
    c.save_models = j.value("save_models", c.save_models);
    return c;
}

}  // namespace riskpipe

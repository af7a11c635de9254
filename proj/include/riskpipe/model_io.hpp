#pragma once

#include <fstream>

#include <json.hpp>

#include "riskpipe/models.hpp"

namespace riskpipe {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<Vector>());
}

inline nlohmann::json hyperparams_to_json(const Hyperparams& h) {
    nlohmann::json j{{"knn_k", h.knn_k},
                     {"alpha", h.alpha},
                     {"svr_c", h.svr_c},
                     {"svr_epsilon", h.svr_epsilon},
                     {"rbf_gamma", h.rbf_gamma},
                     {"tree_min_leaf", h.tree_min_leaf},
                     {"forest_n_trees", h.forest_n_trees},
                     {"forest_seed", h.forest_seed},
                     {"forest_bootstrap", h.forest_bootstrap},
                     {"forest_features", h.forest_features}};
    if (h.tree_max_depth) j["tree_max_depth"] = *h.tree_max_depth;
    return j;
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& j) {
    Hyperparams h;
    h.knn_k = j.at("knn_k").get<std::size_t>();
    h.alpha = j.at("alpha").get<double>();
    h.svr_c = j.at("svr_c").get<double>();
    h.svr_epsilon = j.at("svr_epsilon").get<double>();
    h.rbf_gamma = j.at("rbf_gamma").get<double>();
    h.tree_min_leaf = j.at("tree_min_leaf").get<std::size_t>();
    h.forest_n_trees = j.at("forest_n_trees").get<std::size_t>();
    h.forest_seed = j.at("forest_seed").get<std::uint64_t>();
    h.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
    h.forest_features = j.at("forest_features").get<std::size_t>();
    if (j.contains("tree_max_depth")) h.tree_max_depth = j.at("tree_max_depth").get<std::size_t>();
    return h;
}

inline nlohmann::json tree_to_json(const TreeState& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
        nodes.push_back({{"left", n.left},
                         {"right", n.right},
                         {"feature", n.feature},
                         {"threshold", n.threshold},
                         {"value", n.value},
                         {"n_samples", n.n_samples},
                         {"gain", n.gain}});
    }
    return {{"nodes", nodes}, {"n_features", t.n_features}};
}

inline TreeState tree_from_json(const nlohmann::json& j) {
    TreeState t;
    t.n_features = j.at("n_features").get<std::size_t>();
    for (const auto& jn : j.at("nodes")) {
        TreeNode n;
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.feature = jn.at("feature").get<std::size_t>();
        n.threshold = jn.at("threshold").get<double>();
        n.value = jn.at("value").get<double>();
        n.n_samples = jn.at("n_samples").get<std::size_t>();
        n.gain = jn.at("gain").get<double>();
        t.nodes.push_back(n);
    }
    return t;
}

}  // namespace detail

/// Versioned JSON document holding a trained model: kind, hyperparameters,
/// and the learned arrays.
inline nlohmann::json model_to_json(const ModelFit& m) {
    nlohmann::json j;
    j["version"] = kModelFormatVersion;
    j["kind"] = to_string(m.kind);
    j["n_features"] = m.n_features;
    j["hyperparams"] = detail::hyperparams_to_json(m.params);
    j["diagnostics"] = {{"converged", m.diagnostics.converged},
                        {"iterations", m.diagnostics.iterations}};

    nlohmann::json st;
    if (const auto* knn = std::get_if<KnnState>(&m.state)) {
        st = {{"x", detail::matrix_to_json(knn->x)}, {"y", knn->y}};
    } else if (const auto* lin = std::get_if<LinearState>(&m.state)) {
        st = {{"intercept", lin->intercept}, {"coef", lin->coef}};
    } else if (const auto* svr = std::get_if<SvrRbfState>(&m.state)) {
        st = {{"support_x", detail::matrix_to_json(svr->support_x)},
              {"dual_coef", svr->dual_coef},
              {"bias", svr->bias},
              {"gamma", svr->gamma}};
    } else if (const auto* tree = std::get_if<TreeState>(&m.state)) {
        st = detail::tree_to_json(*tree);
    } else if (const auto* forest = std::get_if<ForestState>(&m.state)) {
        nlohmann::json trees = nlohmann::json::array();
        for (const auto& t : forest->trees) trees.push_back(detail::tree_to_json(t));
        st = {{"trees", trees}, {"n_features", forest->n_features}};
    }
    j["state"] = st;
    return j;
}

inline ModelFit model_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != kModelFormatVersion) {
        throw ParseError("unsupported model format version");
    }
    ModelFit m;
    m.kind = model_kind_from_string(j.at("kind").get<std::string>());
    m.n_features = j.at("n_features").get<std::size_t>();
    m.params = detail::hyperparams_from_json(j.at("hyperparams"));
    m.diagnostics.converged = j.at("diagnostics").at("converged").get<bool>();
    m.diagnostics.iterations = j.at("diagnostics").at("iterations").get<std::size_t>();

    const auto& st = j.at("state");
    switch (m.kind) {
        case ModelKind::knn:
            m.state = KnnState{detail::matrix_from_json(st.at("x")), st.at("y").get<Vector>()};
            break;
        case ModelKind::ols:
        case ModelKind::lasso:
        case ModelKind::ridge:
        case ModelKind::svr_linear:
            m.state = LinearState{st.at("intercept").get<double>(), st.at("coef").get<Vector>()};
            break;
        case ModelKind::svr_rbf:
            m.state = SvrRbfState{detail::matrix_from_json(st.at("support_x")),
                                  st.at("dual_coef").get<Vector>(), st.at("bias").get<double>(),
                                  st.at("gamma").get<double>()};
            break;
        case ModelKind::tree:
            m.state = detail::tree_from_json(st);
            break;
        case ModelKind::forest: {
            ForestState f;
            f.n_features = st.at("n_features").get<std::size_t>();
            for (const auto& jt : st.at("trees")) f.trees.push_back(detail::tree_from_json(jt));
            m.state = std::move(f);
            break;
        }
    }
    return m;
}

inline void save_model(const ModelFit& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << model_to_json(m).dump(2) << "\n";
}

inline ModelFit load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace riskpipe

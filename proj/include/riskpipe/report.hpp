#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskpipe/metrics.hpp"
#include "riskpipe/pipeline_config.hpp"
#include "riskpipe/select.hpp"

namespace riskpipe {

/// Display name used in report tables.
inline std::string display_label(ModelKind k) {
    switch (k) {
        case ModelKind::knn: return "KNN";
        case ModelKind::ols: return "Linear Regression";
        case ModelKind::lasso: return "Lasso Regression";
        case ModelKind::ridge: return "Ridge Regression";
        case ModelKind::svr_linear: return "SVR (Linear Kernel)";
        case ModelKind::svr_rbf: return "SVR (RBF Kernel)";
        case ModelKind::tree: return "Decision Tree";
        case ModelKind::forest: return "Random Forest";
    }
    return "?";
}

struct MetricsRow {
    ModelKind kind = ModelKind::ols;
    EvalResult eval;
    std::string hyper_note;  ///< e.g. "k=5" or "alpha=0.1"
    bool converged = true;
};

struct KScore {
    std::size_t k = 0;
    double silhouette = 0.0;
};

struct TsneGridRow {
    double perplexity = 0.0;
    double learning_rate = 0.0;
    std::size_t iterations = 0;
    double silhouette = 0.0;
};

struct VisualizationScore {
    std::string method;
    double silhouette = 0.0;
};

/// Everything one pipeline execution produced, serializable to JSON and
/// renderable as a plain-text report.
struct PipelineReport {
    PipelineConfig config;
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::size_t train_n = 0;
    std::size_t test_n = 0;

    std::vector<MetricsRow> metrics;
    std::vector<FeatureRanking> coefficient_rankings;
    std::vector<FeatureRanking> rfe_rankings;
    std::vector<KScore> k_sweep;
    std::size_t best_k = 0;
    std::vector<TsneGridRow> tsne_grid;  ///< silhouette descending
    double pca_silhouette = 0.0;
    std::vector<VisualizationScore> visualization;
    std::vector<std::string> plots;  ///< filenames relative to out_dir
    std::vector<std::string> warnings;
};

/// Fixed annotation block: headline values reported by the original study on
/// its proprietary retail dataset. Context for readers, never a test target.
inline std::vector<std::string> reference_baselines() {
    return {
        "best regression row: SVR (RBF Kernel) MAE 0.6816, MSE 0.7948, R2 0.6328",
        "best embedding: t-SNE perplexity 5, learning rate 10, 250 iterations, silhouette 0.14943",
        "top coefficient-ranked features: Linear Regression -> Department Sales Item Count, "
        "Department Refunds Item Count; Lasso -> Number of Sales Per Day, Number of Item Voids; "
        "Ridge -> Department Sales Total Amount, Department Sales Item Count",
    };
}

namespace detail {

inline nlohmann::json ranking_to_json(const FeatureRanking& r) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"name", e.name}, {"score", e.score}, {"rank", e.rank}});
    }
    return {{"method", r.method}, {"model", to_string(r.model_kind)}, {"entries", entries}};
}

inline FeatureRanking ranking_from_json(const nlohmann::json& j) {
    FeatureRanking r;
    r.method = j.at("method").get<std::string>();
    r.model_kind = model_kind_from_string(j.at("model").get<std::string>());
    for (const auto& je : j.at("entries")) {
        r.entries.push_back({je.at("name").get<std::string>(), je.at("score").get<double>(),
                             je.at("rank").get<std::size_t>()});
    }
    return r;
}

inline std::string num4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace detail

inline nlohmann::json report_to_json(const PipelineReport& r) {
    nlohmann::json j;
    j["config"] = config_to_json(r.config);
    j["dataset"] = {{"rows", r.n_rows},
                    {"features", r.n_features},
                    {"train_rows", r.train_n},
                    {"test_rows", r.test_n}};

    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& m : r.metrics) {
        metrics.push_back({{"model", to_string(m.kind)},
                           {"label", display_label(m.kind)},
                           {"mae", m.eval.mae},
                           {"mse", m.eval.mse},
                           {"r2", m.eval.r2},
                           {"n", m.eval.n},
                           {"hyperparams", m.hyper_note},
                           {"converged", m.converged}});
    }
    j["metrics"] = metrics;

    nlohmann::json coef = nlohmann::json::array();
    for (const auto& c : r.coefficient_rankings) coef.push_back(detail::ranking_to_json(c));
    j["coefficient_rankings"] = coef;
    nlohmann::json rfe = nlohmann::json::array();
    for (const auto& c : r.rfe_rankings) rfe.push_back(detail::ranking_to_json(c));
    j["rfe_rankings"] = rfe;

    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& s : r.k_sweep) sweep.push_back({{"k", s.k}, {"silhouette", s.silhouette}});
    j["k_sweep"] = sweep;
    j["best_k"] = r.best_k;

    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : r.tsne_grid) {
        grid.push_back({{"perplexity", g.perplexity},
                        {"learning_rate", g.learning_rate},
                        {"iterations", g.iterations},
                        {"silhouette", g.silhouette}});
    }
    j["tsne_grid"] = grid;
    j["pca_silhouette"] = r.pca_silhouette;

    nlohmann::json vis = nlohmann::json::array();
    for (const auto& v : r.visualization) {
        vis.push_back({{"method", v.method}, {"silhouette", v.silhouette}});
    }
    j["visualization"] = vis;
    j["plots"] = r.plots;
    j["warnings"] = r.warnings;
    j["reference_baselines"] = reference_baselines();
    return j;
}

inline PipelineReport report_from_json(const nlohmann::json& j) {
    PipelineReport r;
    r.config = config_from_json(j.at("config"));
    r.n_rows = j.at("dataset").at("rows").get<std::size_t>();
    r.n_features = j.at("dataset").at("features").get<std::size_t>();
    r.train_n = j.at("dataset").at("train_rows").get<std::size_t>();
    r.test_n = j.at("dataset").at("test_rows").get<std::size_t>();
    for (const auto& jm : j.at("metrics")) {
        MetricsRow m;
        m.kind = model_kind_from_string(jm.at("model").get<std::string>());
        m.eval.mae = jm.at("mae").get<double>();
        m.eval.mse = jm.at("mse").get<double>();
        m.eval.r2 = jm.at("r2").get<double>();
        m.eval.n = jm.at("n").get<std::size_t>();
        m.hyper_note = jm.at("hyperparams").get<std::string>();
        m.converged = jm.at("converged").get<bool>();
        r.metrics.push_back(std::move(m));
    }
    for (const auto& jc : j.at("coefficient_rankings"))
        r.coefficient_rankings.push_back(detail::ranking_from_json(jc));
    for (const auto& jc : j.at("rfe_rankings"))
        r.rfe_rankings.push_back(detail::ranking_from_json(jc));
    for (const auto& js : j.at("k_sweep")) {
        r.k_sweep.push_back(
            {js.at("k").get<std::size_t>(), js.at("silhouette").get<double>()});
    }
    r.best_k = j.at("best_k").get<std::size_t>();
    for (const auto& jg : j.at("tsne_grid")) {
        r.tsne_grid.push_back({jg.at("perplexity").get<double>(),
                               jg.at("learning_rate").get<double>(),
                               jg.at("iterations").get<std::size_t>(),
                               jg.at("silhouette").get<double>()});
    }
    r.pca_silhouette = j.at("pca_silhouette").get<double>();
    for (const auto& jv : j.at("visualization")) {
        r.visualization.push_back(
            {jv.at("method").get<std::string>(), jv.at("silhouette").get<double>()});
    }
    r.plots = j.at("plots").get<std::vector<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
}

/// Human-readable rendering with the regression-metrics and t-SNE grid
/// tables plus rankings, sweeps, plots, and warnings.
inline std::string render_report_text(const PipelineReport& r) {
    std::ostringstream o;
    o << "== riskpipe report ==\n";
    o << "dataset: "
      << (r.config.input_path.empty()
              ? "synthetic n=" + std::to_string(r.config.synthetic_n)
              : r.config.input_path)
      << ", " << r.n_features << " features, " << r.n_rows << " rows ("
      << r.train_n << " train / " << r.test_n << " test), seed "
      << r.config.seed << "\n\n";

    o << "-- Regression metrics (test set) --\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-22s %9s %9s %9s  %s\n", "Model", "MAE", "MSE", "R2",
                  "hyperparams");
    o << line;
    for (const auto& m : r.metrics) {
        std::snprintf(line, sizeof(line), "%-22s %9.4f %9.4f %9.4f  %s%s\n",
                      display_label(m.kind).c_str(), m.eval.mae, m.eval.mse, m.eval.r2,
                      m.hyper_note.c_str(), m.converged ? "" : " [not converged]");
        o << line;
    }

    o << "\n-- Top features by |coefficient| --\n";
    for (const auto& c : r.coefficient_rankings) {
        o << display_label(c.model_kind) << ": ";
        for (std::size_t i = 0; i < std::min<std::size_t>(2, c.entries.size()); ++i) {
            o << (i ? ", " : "") << c.entries[i].name << " (" << detail::num4(c.entries[i].score)
              << ")";
        }
        o << "\n";
    }

    o << "\n-- RFE survivors (target " << r.config.rfe_target << ") --\n";
    for (const auto& c : r.rfe_rankings) {
        o << display_label(c.model_kind) << ": ";
        std::size_t shown = 0;
        for (const auto& e : c.entries) {
            if (e.rank > r.config.rfe_target) break;
            o << (shown++ ? ", " : "") << e.name;
        }
        o << "\n";
    }

    o << "\n-- k-means sweep (silhouette on standardized features) --\n";
    for (const auto& s : r.k_sweep) {
        o << "k=" << s.k << ": " << detail::num4(s.silhouette)
          << (s.k == r.best_k ? "  <- best" : "") << "\n";
    }

    o << "\n-- t-SNE grid (silhouette descending) --\n";
    std::snprintf(line, sizeof(line), "%10s %14s %11s %11s\n", "Perplexity", "Learning Rate",
                  "Iterations", "Silhouette");
    o << line;
    for (const auto& g : r.tsne_grid) {
        std::snprintf(line, sizeof(line), "%10.4g %14.4g %11zu %11.5f\n", g.perplexity,
                      g.learning_rate, g.iterations, g.silhouette);
        o << line;
    }

    o << "\n-- Visualization comparison (k-means k=2 silhouette) --\n";
    for (const auto& v : r.visualization) {
        o << v.method << ": " << detail::num4(v.silhouette) << "\n";
    }

    o << "\n-- Plots --\n";
    for (const auto& p : r.plots) o << p << "\n";

    if (!r.warnings.empty()) {
        o << "\n-- Warnings --\n";
        for (const auto& w : r.warnings) o << w << "\n";
    }

    o << "\n-- Reference baselines (original study, proprietary data; not comparable) --\n";
    for (const auto& b : reference_baselines()) o << b << "\n";
    return o.str();
}

/// Write report.json and report.txt into dir.
inline void emit_report(const PipelineReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json", std::ios::binary);
        if (!out) throw IoError("cannot write report.json");
        out << report_to_json(r).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "report.txt", std::ios::binary);
        if (!out) throw IoError("cannot write report.txt");
        out << render_report_text(r);
    }
}

}  // namespace riskpipe

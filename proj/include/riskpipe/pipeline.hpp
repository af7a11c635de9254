#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "riskpipe/cluster.hpp"
#include "riskpipe/model_io.hpp"
#include "riskpipe/models.hpp"
#include "riskpipe/pca.hpp"
#include "riskpipe/report.hpp"
#include "riskpipe/svg.hpp"
#include "riskpipe/tsne.hpp"

namespace riskpipe {

/// Stage seeds are derived additively from the global seed so every stage is
/// reproducible in isolation.
struct StageSeeds {
    std::uint64_t synthetic, split, tune, forest, tsne, kmeans;
    explicit StageSeeds(std::uint64_t s)
        : synthetic(s), split(s + 1), tune(s + 2), forest(s + 3), tsne(s + 4), kmeans(s + 5) {}
};

/// Embedding CSV rows: x, y, risk_factor, cluster_label.
inline void write_embedding_csv(const Embedding& e, const Vector& risk,
                                const std::vector<std::size_t>& labels,
                                const std::filesystem::path& path) {
    if (risk.size() != e.points.rows() || labels.size() != e.points.rows()) {
        throw ShapeError("write_embedding_csv: length mismatch");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "x,y,risk_factor,cluster_label\n";
    for (std::size_t i = 0; i < e.points.rows(); ++i) {
        out << detail::format_double(e.points(i, 0)) << "," << detail::format_double(e.points(i, 1))
            << "," << detail::format_double(risk[i]) << "," << labels[i] << "\n";
    }
}

/// Two-column ranking CSV (feature, rank).
inline void write_ranking_csv(const FeatureRanking& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "feature,rank\n";
    for (const auto& e : r.entries) out << e.name << "," << e.rank << "\n";
}

namespace detail {

inline std::string hyper_note_for(ModelKind kind, const Hyperparams& h) {
    char buf[96];
    switch (kind) {
        case ModelKind::knn:
            std::snprintf(buf, sizeof(buf), "k=%zu", h.knn_k);
            break;
        case ModelKind::ols:
            return "";
        case ModelKind::lasso:
        case ModelKind::ridge:
            std::snprintf(buf, sizeof(buf), "alpha=%g", h.alpha);
            break;
        case ModelKind::svr_linear:
            std::snprintf(buf, sizeof(buf), "C=%g, eps=%g", h.svr_c, h.svr_epsilon);
            break;
        case ModelKind::svr_rbf:
            std::snprintf(buf, sizeof(buf), "C=%g, eps=%g, gamma=%g", h.svr_c, h.svr_epsilon,
                          h.rbf_gamma);
            break;
        case ModelKind::tree:
            if (h.tree_max_depth) {
                std::snprintf(buf, sizeof(buf), "max_depth=%zu, min_leaf=%zu", *h.tree_max_depth,
                              h.tree_min_leaf);
            } else {
                std::snprintf(buf, sizeof(buf), "min_leaf=%zu", h.tree_min_leaf);
            }
            break;
        case ModelKind::forest:
            std::snprintf(buf, sizeof(buf), "trees=%zu", h.forest_n_trees);
            break;
    }
    return buf;
}

}  // namespace detail

/// Run the full workflow: ingest -> standardize -> split -> fit/tune the
/// configured models -> evaluate -> coefficient + RFE rankings -> PCA ->
/// k-means sweep -> t-SNE grid search -> plots + report files.
///
/// Fully deterministic under config.seed. Any stage failure aborts with a
/// stage-tagged PipelineError and removes files written so far.
inline PipelineReport run_pipeline(const PipelineConfig& config) {
    config.validate();
    const StageSeeds seeds(config.seed);
    const std::filesystem::path out_dir(config.out_dir);
    std::vector<std::filesystem::path> written;

    std::string stage = "setup";
    auto enter = [&](const char* name) { stage = name; };

    try {
        PipelineReport report;
        report.config = config;

        enter("load");
        Dataset raw = config.input_path.empty()
                          ? generate_synthetic(config.synthetic_n, seeds.synthetic)
                          : load_csv(config.input_path, default_schema());
        report.n_rows = raw.n();
        report.n_features = raw.x.cols();

        enter("standardize");
        auto [data, scaler] = standardize(raw);
        for (std::size_t j : scaler.zero_variance) {
            report.warnings.push_back("zero-variance feature '" +
                                      data.schema.feature_names[j] + "' standardized to zeros");
        }

        enter("split");
        const Split split = train_test_split(data, config.test_fraction, seeds.split);
        report.train_n = split.train.n();
        report.test_n = split.test.n();

        enter("models");
        const double gamma_default = 1.0 / static_cast<double>(data.x.cols());
        std::map<ModelKind, ModelFit> fits;
        std::map<ModelKind, Hyperparams> hypers;
        for (ModelKind kind : config.models) {
            Hyperparams h;
            h.svr_c = config.svr_c;
            h.svr_epsilon = config.svr_epsilon;
            h.rbf_gamma = config.rbf_gamma.value_or(gamma_default);
            h.tree_max_depth = config.tree_max_depth;
            h.tree_min_leaf = config.tree_min_leaf;
            h.forest_n_trees = config.forest_n_trees;
            h.forest_seed = seeds.forest;
            if (kind == ModelKind::knn) {
                if (config.knn_k) {
                    h.knn_k = *config.knn_k;
                } else {
                    h = tune_knn(split.train.x, split.train.y, default_knn_candidates(),
                                 seeds.tune, h);
                }
            } else if (kind == ModelKind::lasso || kind == ModelKind::ridge) {
                const auto& override_alpha =
                    kind == ModelKind::lasso ? config.lasso_alpha : config.ridge_alpha;
                if (override_alpha) {
                    h.alpha = *override_alpha;
                } else {
                    h = tune_alpha(split.train.x, split.train.y, kind,
                                   default_alpha_candidates(), seeds.tune, h);
                }
            }
            ModelFit fit = fit_model(kind, split.train.x, split.train.y, h);
            MetricsRow row;
            row.kind = kind;
            row.eval = evaluate(fit, split.test);
            row.hyper_note = detail::hyper_note_for(kind, h);
            row.converged = fit.diagnostics.converged;
            report.metrics.push_back(std::move(row));
            hypers[kind] = h;
            fits.emplace(kind, std::move(fit));
        }

        enter("selection");
        Dataset train_ds = split.train;
        for (ModelKind kind : config.models) {
            if (is_linear_kind(kind)) {
                report.coefficient_rankings.push_back(
                    rank_by_coefficients(fits.at(kind), data.schema.feature_names));
            }
        }
        struct RfePair {
            ModelKind kind;
            std::vector<std::size_t> top_cols;
        };
        std::vector<RfePair> rfe_pairs;
        for (ModelKind kind : config.rfe_models) {
            if (!fits.count(kind)) continue;
            FeatureRanking ranking = rfe(kind, hypers.at(kind), train_ds, config.rfe_target);
            RfePair pair{kind, {}};
            for (const auto& e : ranking.entries) {
                if (e.rank <= std::min<std::size_t>(2, config.rfe_target)) {
                    const auto& names = data.schema.feature_names;
                    pair.top_cols.push_back(static_cast<std::size_t>(
                        std::find(names.begin(), names.end(), e.name) - names.begin()));
                }
            }
            rfe_pairs.push_back(std::move(pair));
            report.rfe_rankings.push_back(std::move(ranking));
        }

        enter("pca");
        const PcaModel pca = pca_fit(data.x);
        const Embedding pca_embedding = pca_transform(pca, data.x);
        const Clustering pca_clusters = kmeans(pca_embedding.points, 2, seeds.kmeans);
        report.pca_silhouette = silhouette(pca_embedding.points, pca_clusters.labels);
        report.visualization.push_back({"pca", report.pca_silhouette});
        for (const auto& pair : rfe_pairs) {
            if (pair.top_cols.size() < 2) continue;
            const Matrix sub = data.x.select_cols(pair.top_cols);
            const Clustering cl = kmeans(sub, 2, seeds.kmeans);
            report.visualization.push_back(
                {"top-2 rfe features, " + display_label(pair.kind), silhouette(sub, cl.labels)});
        }

        enter("k-sweep");
        const std::size_t k_max = std::min<std::size_t>(config.k_max, data.n() - 1);
        const KSelection sweep = select_k(data.x, config.k_min, k_max, seeds.kmeans);
        report.best_k = sweep.best_k;
        for (const auto& [k, s] : sweep.scores) report.k_sweep.push_back({k, s});

        enter("tsne-grid");
        TsneGridSearch grid =
            grid_search_tsne(data.x, config.tsne_perplexities, config.tsne_learning_rates,
                             config.tsne_iterations, seeds.tsne, config.threads);
        for (const auto& w : grid.warnings) report.warnings.push_back(w);
        for (const auto& g : grid.results) {
            report.tsne_grid.push_back({g.params.perplexity, g.params.learning_rate,
                                        g.params.iterations, g.silhouette});
        }
        if (!grid.results.empty()) {
            report.visualization.push_back({"tsne (best grid cell)", grid.results[0].silhouette});
        }

        enter("plots");
        std::filesystem::create_directories(out_dir);
        auto emit = [&](const std::string& name, auto&& fn) {
            const std::filesystem::path p = out_dir / name;
            fn(p);
            written.push_back(p);
            report.plots.push_back(name);
        };

        emit("fig_histogram.svg", [&](const std::filesystem::path& p) {
            emit_histogram_svg(raw.y, config.histogram_bins, p, "Risk factor distribution",
                               "risk factor", "count");
        });
        for (std::size_t i = 0; i < rfe_pairs.size(); ++i) {
            const auto& pair = rfe_pairs[i];
            if (pair.top_cols.size() < 2) continue;
            Embedding e;
            e.method = "rfe";
            e.points = data.x.select_cols({pair.top_cols[0], pair.top_cols[1]});
            emit("fig_rfe_" + std::string(to_string(pair.kind)) + ".svg",
                 [&](const std::filesystem::path& p) {
                     emit_scatter_svg(e, raw.y, nullptr, p,
                                      "Top-2 RFE features, " + display_label(pair.kind),
                                      data.schema.feature_names[pair.top_cols[0]],
                                      data.schema.feature_names[pair.top_cols[1]]);
                 });
        }
        emit("fig_pca.svg", [&](const std::filesystem::path& p) {
            emit_scatter_svg(pca_embedding, raw.y, &pca_clusters.centroids, p,
                             "PCA projection with k-means centroids", "PC 1", "PC 2");
        });
        for (std::size_t r = 0; r < std::min<std::size_t>(3, grid.results.size()); ++r) {
            const auto& cell = grid.results[r];
            char title[128];
            std::snprintf(title, sizeof(title),
                          "t-SNE #%zu (perplexity %g, lr %g, %zu iterations)", r + 1,
                          cell.params.perplexity, cell.params.learning_rate,
                          cell.params.iterations);
            emit("fig_tsne_" + std::to_string(r + 1) + ".svg",
                 [&](const std::filesystem::path& p) {
                     emit_scatter_svg(cell.embedding, raw.y, &cell.clustering.centroids, p, title,
                                      "t-SNE 1", "t-SNE 2");
                 });
        }
        for (const auto& ranking : report.coefficient_rankings) {
            emit("coefficients_" + std::string(to_string(ranking.model_kind)) + ".csv",
                 [&](const std::filesystem::path& p) { write_ranking_csv(ranking, p); });
        }
        for (const auto& ranking : report.rfe_rankings) {
            emit("rfe_" + std::string(to_string(ranking.model_kind)) + ".csv",
                 [&](const std::filesystem::path& p) { write_ranking_csv(ranking, p); });
        }
        emit("k_sweep.csv", [&](const std::filesystem::path& p) {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw IoError("cannot write " + p.string());
            out << "k,silhouette\n";
            for (const auto& s : report.k_sweep)
                out << s.k << "," << detail::format_double(s.silhouette) << "\n";
        });
        emit("tsne_grid.csv", [&](const std::filesystem::path& p) {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw IoError("cannot write " + p.string());
            out << "perplexity,learning_rate,iterations,silhouette\n";
            for (const auto& g : report.tsne_grid) {
                out << detail::format_double(g.perplexity) << ","
                    << detail::format_double(g.learning_rate) << "," << g.iterations << ","
                    << detail::format_double(g.silhouette) << "\n";
            }
        });
        emit("pca_embedding.csv", [&](const std::filesystem::path& p) {
            write_embedding_csv(pca_embedding, raw.y, pca_clusters.labels, p);
        });
        if (!grid.results.empty()) {
            emit("tsne_top1_embedding.csv", [&](const std::filesystem::path& p) {
                write_embedding_csv(grid.results[0].embedding, raw.y,
                                    grid.results[0].clustering.labels, p);
            });
        }
        if (config.save_models) {
            std::filesystem::create_directories(out_dir / "models");
            for (const auto& [kind, fit] : fits) {
                const auto p = out_dir / "models" / (std::string(to_string(kind)) + ".json");
                save_model(fit, p);
                written.push_back(p);
            }
        }

        enter("report");
        emit_report(report, out_dir);
        written.push_back(out_dir / "report.json");
        written.push_back(out_dir / "report.txt");
        return report;
    } catch (const std::exception& e) {
        for (const auto& p : written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw PipelineError("stage " + stage + ": " + e.what());
    }
}

}  // namespace riskpipe

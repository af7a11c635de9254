// riskpipe command-line tool: synthetic data generation, the full analysis
// pipeline, standalone embeddings, and report re-rendering.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskpipe/riskpipe.hpp"

namespace {

using namespace riskpipe;

std::vector<ModelKind> parse_models(const std::vector<std::string>& names) {
    std::vector<ModelKind> kinds;
    for (const auto& n : names) kinds.push_back(model_kind_from_string(n));
    return kinds;
}

void parse_k_range(const std::string& spec, std::size_t& k_min, std::size_t& k_max) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ArgumentError("--k-range expects MIN:MAX");
    k_min = std::stoul(spec.substr(0, colon));
    k_max = std::stoul(spec.substr(colon + 1));
}

int cmd_synth(std::size_t n, std::uint64_t seed, const std::string& out) {
    const Dataset d = generate_synthetic(n, seed);
    write_csv(d, out);
    std::printf("wrote %zu rows x %zu features to %s\n", d.n(), d.x.cols(), out.c_str());
    return 0;
}

int cmd_run(const PipelineConfig& config) {
    const PipelineReport report = run_pipeline(config);
    std::printf("%s", render_report_text(report).c_str());
    std::printf("\nartifacts in %s (report.json, report.txt, %zu plot/csv files)\n",
                config.out_dir.c_str(), report.plots.size());
    return 0;
}

int cmd_embed(const std::string& input, const std::string& method, const TsneParams& params,
              const std::string& out_dir) {
    const Dataset raw = load_csv(input, default_schema());
    auto [data, scaler] = standardize(raw);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    Embedding e;
    if (method == "pca") {
        e = pca_transform(pca_fit(data.x), data.x);
    } else if (method == "tsne") {
        e = tsne(data.x, params);
    } else {
        throw ArgumentError("--method must be pca or tsne");
    }
    const Clustering cl = kmeans(e.points, 2, params.seed);
    const double sil = silhouette(e.points, cl.labels);

    write_embedding_csv(e, raw.y, cl.labels, dir / (method + "_embedding.csv"));
    emit_scatter_svg(e, raw.y, &cl.centroids, dir / ("fig_" + method + ".svg"),
                     method + " embedding", method + " 1", method + " 2");
    std::printf("%s embedding of %zu rows: k=2 silhouette %.5f", method.c_str(), data.n(), sil);
    if (e.final_kl) std::printf(", final KL %.5f", *e.final_kl);
    std::printf("\nwrote %s_embedding.csv and fig_%s.svg to %s\n", method.c_str(), method.c_str(),
                out_dir.c_str());
    return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
    std::ifstream f(in);
    if (!f) throw IoError("cannot open " + in);
    nlohmann::json j;
    f >> j;
    const PipelineReport report = report_from_json(j);
    const std::string text = render_report_text(report);
    if (out.empty()) {
        std::printf("%s", text.c_str());
    } else {
        std::ofstream o(out, std::ios::binary);
        if (!o) throw IoError("cannot write " + out);
        o << text;
        std::printf("wrote %s\n", out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"riskpipe: regression, feature selection, embedding, and clustering "
                 "for tabular risk data"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic risk dataset as CSV");
    std::size_t synth_n = 991;
    std::uint64_t synth_seed = 7;
    std::string synth_out = "synthetic.csv";
    synth->add_option("--n", synth_n, "number of rows")->capture_default_str();
    synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
    synth->add_option("--out", synth_out, "output CSV path")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "run the full analysis pipeline");
    PipelineConfig config;
    std::string config_path;
    std::vector<std::string> model_names, rfe_model_names;
    std::string k_range;
    std::size_t knn_k_flag = 0;
    double lasso_alpha_flag = -1.0, ridge_alpha_flag = -1.0, rbf_gamma_flag = -1.0;
    std::map<std::string, CLI::Option*> run_opts;
    run->add_option("--config", config_path, "key=value config file (flags take precedence)");
    run_opts["input"] =
        run->add_option("--input", config.input_path, "input CSV (default: synthetic data)");
    run_opts["synthetic"] = run->add_option("--synthetic", config.synthetic_n,
                                            "synthetic row count")
                                ->capture_default_str();
    run_opts["seed"] = run->add_option("--seed", config.seed, "global seed")
                           ->capture_default_str();
    run_opts["test-fraction"] = run->add_option("--test-fraction", config.test_fraction,
                                                "test split fraction")
                                    ->capture_default_str();
    run_opts["out"] = run->add_option("--out", config.out_dir, "output directory")
                          ->capture_default_str();
    run_opts["models"] = run->add_option("--models", model_names, "model kinds to fit")
                             ->delimiter(',');
    run_opts["rfe-models"] =
        run->add_option("--rfe-models", rfe_model_names, "model kinds to run RFE with")
            ->delimiter(',');
    run_opts["rfe-target"] = run->add_option("--rfe-target", config.rfe_target,
                                             "features RFE keeps")
                                 ->capture_default_str();
    run_opts["tsne-perplexities"] = run->add_option("--tsne-perplexities",
                                                    config.tsne_perplexities,
                                                    "t-SNE perplexity grid")
                                        ->delimiter(',');
    run_opts["tsne-learning-rates"] = run->add_option("--tsne-learning-rates",
                                                      config.tsne_learning_rates,
                                                      "t-SNE learning-rate grid")
                                          ->delimiter(',');
    run_opts["tsne-iterations"] = run->add_option("--tsne-iterations", config.tsne_iterations,
                                                  "t-SNE iteration grid")
                                      ->delimiter(',');
    run_opts["k-range"] =
        run->add_option("--k-range", k_range, "k-means sweep range MIN:MAX (default 2:10)");
    run_opts["knn-k"] =
        run->add_option("--knn-k", knn_k_flag, "fix the KNN neighbor count (skips tuning)");
    run_opts["lasso-alpha"] =
        run->add_option("--lasso-alpha", lasso_alpha_flag, "fix the lasso alpha (skips tuning)");
    run_opts["ridge-alpha"] =
        run->add_option("--ridge-alpha", ridge_alpha_flag, "fix the ridge alpha (skips tuning)");
    run_opts["svr-c"] = run->add_option("--svr-c", config.svr_c, "SVR budget C")
                            ->capture_default_str();
    run_opts["svr-epsilon"] = run->add_option("--svr-epsilon", config.svr_epsilon,
                                              "SVR tube half-width")
                                  ->capture_default_str();
    run_opts["rbf-gamma"] = run->add_option("--rbf-gamma", rbf_gamma_flag,
                                            "RBF kernel gamma (default 1/n_features)");
    run_opts["forest-trees"] = run->add_option("--forest-trees", config.forest_n_trees,
                                               "random-forest size")
                                   ->capture_default_str();
    run_opts["histogram-bins"] = run->add_option("--histogram-bins", config.histogram_bins,
                                                 "histogram bin count")
                                     ->capture_default_str();
    run_opts["threads"] = run->add_option("--threads", config.threads,
                                          "grid-search threads (0 = auto)")
                              ->capture_default_str();
    run_opts["save-models"] =
        run->add_flag("--save-models", config.save_models, "serialize fitted models as JSON");

    // embed
    auto* embed = app.add_subcommand("embed", "embed a CSV with PCA or t-SNE only");
    std::string embed_input, embed_method = "pca", embed_out = "out";
    TsneParams embed_params;
    embed->add_option("--input", embed_input, "input CSV")->required();
    embed->add_option("--method", embed_method, "pca or tsne")->capture_default_str();
    embed->add_option("--out", embed_out, "output directory")->capture_default_str();
    embed->add_option("--perplexity", embed_params.perplexity)->capture_default_str();
    embed->add_option("--learning-rate", embed_params.learning_rate)->capture_default_str();
    embed->add_option("--iterations", embed_params.iterations)->capture_default_str();
    embed->add_option("--seed", embed_params.seed)->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "re-render a saved report.json as text");
    std::string report_in, report_out;
    rep->add_option("--in", report_in, "report.json path")->required();
    rep->add_option("--out", report_out, "output text path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) return cmd_synth(synth_n, synth_seed, synth_out);
        if (*run) {
            // config-file values fill in every option the command line left
            // at its default; explicit flags always win
            if (!config_path.empty()) {
                for (auto& [key, value] : parse_key_value_file(config_path)) {
                    const auto it = run_opts.find(key);
                    if (it == run_opts.end()) {
                        throw ArgumentError("unknown config key '" + key + "'");
                    }
                    if (it->second->count() == 0) {
                        it->second->add_result(value);
                        it->second->run_callback();
                    }
                }
            }
            if (!model_names.empty()) config.models = parse_models(model_names);
            if (!rfe_model_names.empty()) config.rfe_models = parse_models(rfe_model_names);
            if (!k_range.empty()) parse_k_range(k_range, config.k_min, config.k_max);
            if (knn_k_flag > 0) config.knn_k = knn_k_flag;
            if (lasso_alpha_flag >= 0.0) config.lasso_alpha = lasso_alpha_flag;
            if (ridge_alpha_flag >= 0.0) config.ridge_alpha = ridge_alpha_flag;
            if (rbf_gamma_flag > 0.0) config.rbf_gamma = rbf_gamma_flag;
            return cmd_run(config);
        }
        if (*embed) return cmd_embed(embed_input, embed_method, embed_params, embed_out);
        if (*rep) return cmd_report(report_in, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

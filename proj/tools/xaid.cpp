// xaid: train tabular models, explain them with Kernel SHAP and LIME, and
// quantify explainer dissonance.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "xai/experiment.hpp"
#include "xai/reporting.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef XAID_DEFAULT_DATA_DIR
#define XAID_DEFAULT_DATA_DIR "data"
#endif

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string data_dir = XAID_DEFAULT_DATA_DIR;
    // flag overrides; negative / NaN means "keep config value"
    int n = -1;
    int m = -1;
    int jobs = -1;
    double p = -1.0;
    double test_fraction = -1.0;
    std::int64_t seed = -1;
    int explainer_samples = -1;
    std::vector<std::string> models;
};

struct Manifest {
    json files = json::array();
    void add(const std::string& path, const std::string& kind, const std::string& stage) {
        files.push_back(json{{"path", path}, {"kind", kind}, {"producing-stage", stage}});
    }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_config) {
    auto* cfg = cmd->add_option("--config", o.config_path, "experiment config JSON");
    if (needs_config) cfg->required();
    cmd->add_option("--out", o.out_dir, "output directory")->required();
    cmd->add_option("--data-dir", o.data_dir, "directory holding bundled dataset CSVs");
    cmd->add_option("--seed", o.seed, "override master seed");
    cmd->add_option("--n", o.n, "override repeat count n");
    cmd->add_option("--m", o.m, "override outer repetition count m");
    cmd->add_option("--p", o.p, "override support threshold p");
    cmd->add_option("--test-fraction", o.test_fraction, "override test fraction");
    cmd->add_option("--models", o.models, "override first-level model kinds");
    cmd->add_option("--explainer-samples", o.explainer_samples,
                    "override both explainers' sample counts");
    cmd->add_option("--jobs", o.jobs, "parallel experiment cells");
}

xai::ExperimentConfig resolve_config(const CommonOpts& o) {
    xai::ExperimentConfig config = xai::config_from_json_file(o.config_path);
    if (o.seed >= 0) config.master_seed = static_cast<std::uint64_t>(o.seed);
    if (o.n > 0) config.n = o.n;
    if (o.m > 0) config.m = o.m;
    if (o.p > 0.0) config.p = o.p;
    if (o.test_fraction > 0.0) config.test_fraction = o.test_fraction;
    if (o.jobs > 0) config.jobs = o.jobs;
    if (o.explainer_samples > 0) {
        config.shap.n_samples = o.explainer_samples;
        config.lime.n_samples = o.explainer_samples;
    }
    if (!o.models.empty()) {
        config.first_level_models.clear();
        for (const auto& name : o.models)
            config.first_level_models.push_back(xai::model_kind_from_string(name));
    }
    config.validate();
    return config;
}

void write_manifest(const CommonOpts& o, const xai::ExperimentConfig* config,
                    Manifest& manifest) {
    // manifest paths are relative to the output directory so identical runs
    // into different directories stay byte-identical
    const std::string prefix = o.out_dir + "/";
    for (auto& f : manifest.files) {
        std::string p = f["path"].get<std::string>();
        if (p.rfind(prefix, 0) == 0) f["path"] = p.substr(prefix.size());
    }
    json j;
    j["files"] = manifest.files;
    if (config) j["config"] = json::parse(xai::config_to_json(*config));
    std::ofstream out(o.out_dir + "/manifest.json");
    if (!out) throw xai::IoError("cannot write manifest: " + o.out_dir + "/manifest.json");
    out << j.dump(2) << '\n';
}

xai::PreliminaryResults preliminary_stage(const CommonOpts& o,
                                          const xai::ExperimentConfig& config,
                                          Manifest& manifest) {
    // m outer repetitions share the master seed, so the outcomes are
    // identical; this is asserted rather than assumed.
    xai::PreliminaryResults prelim = xai::run_preliminary(config, o.data_dir, o.out_dir);
    for (int rep = 1; rep < config.m; ++rep) {
        xai::PreliminaryResults again = xai::run_preliminary(config, o.data_dir, o.out_dir);
        for (std::size_t c = 0; c < prelim.cells.size(); ++c) {
            if (again.cells[c].repeats.size() != prelim.cells[c].repeats.size() ||
                (prelim.cells[c].usable() &&
                 again.cells[c].mean_avg_correlation() != prelim.cells[c].mean_avg_correlation()))
                throw xai::Error("outer repetition " + std::to_string(rep) +
                                 " diverged from repetition 0");
        }
    }
    for (const auto& f : prelim.exported_files) manifest.add(f, "explanations", "preliminary");
    const std::string path = o.out_dir + "/preliminary.csv";
    xai::export_preliminary_csv(prelim, path);
    manifest.add(path, "results", "preliminary");
    return prelim;
}

void study1_stage(const CommonOpts& o, const xai::ExperimentConfig& config,
                  const xai::PreliminaryResults& prelim, Manifest& manifest) {
    const xai::Study1Outcome outcome =
        xai::run_accuracy_prediction_study(prelim, xai::regression_kinds(), config.p);
    const std::string path = o.out_dir + "/study1.csv";
    xai::export_study1_csv(outcome, path);
    manifest.add(path, "results", "study1");
}

void study2_stage(const CommonOpts& o, const xai::PreliminaryResults& prelim,
                  Manifest& manifest) {
    const xai::Study2Outcome outcome = xai::run_max_variance_study(prelim);
    const std::string path = o.out_dir + "/study2.csv";
    xai::export_study2_csv(outcome, path);
    manifest.add(path, "results", "study2");
}

void report_stage(const CommonOpts& o, const xai::PreliminaryResults& prelim,
                  Manifest& manifest) {
    const std::string dir = o.out_dir + "/plots";
    fs::create_directories(dir);
    for (const auto& dataset_id : prelim.dataset_ids) {
        const auto cells = prelim.cells_for(dataset_id);
        if (cells.empty()) continue;
        std::vector<std::string> model_labels;
        Eigen::VectorXd avg(static_cast<Eigen::Index>(cells.size()));
        Eigen::VectorXd mx(static_cast<Eigen::Index>(cells.size()));
        Eigen::VectorXd acc(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            model_labels.push_back(to_string(cells[i]->model));
            avg(static_cast<Eigen::Index>(i)) = cells[i]->mean_avg_correlation();
            mx(static_cast<Eigen::Index>(i)) = cells[i]->mean_correlation_max();
            acc(static_cast<Eigen::Index>(i)) = cells[i]->mean_accuracy();
        }

        // heatmap: model rows x feature columns of mean effective correlations
        const auto& features = cells[0]->repeats[0].report.feature_order;
        Eigen::MatrixXd heat(static_cast<Eigen::Index>(cells.size()),
                             static_cast<Eigen::Index>(features.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            for (std::size_t f = 0; f < features.size(); ++f) {
                double sum = 0.0;
                for (const auto& rep : cells[i]->repeats)
                    sum += rep.report.per_feature.at(features[f]).effective();
                heat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) =
                    sum / static_cast<double>(cells[i]->repeats.size());
            }
        }
        std::string stem = dir + "/" + dataset_id + "_all_heatmap";
        xai::emit_heatmap(model_labels, features, heat, stem,
                          dataset_id + ": SHAP-LIME correlation per model and feature");
        manifest.add(stem + ".csv", "plot-data", "report");
        manifest.add(stem + ".svg", "plot", "report");

        stem = dir + "/" + dataset_id + "_all_scatter_fit";
        xai::emit_scatter_fit(avg, acc, model_labels, stem,
                              dataset_id + ": correlation vs accuracy", "average correlation",
                              "accuracy");
        manifest.add(stem + ".csv", "plot-data", "report");
        manifest.add(stem + ".svg", "plot", "report");

        if (cells.size() >= 2) {
            stem = dir + "/" + dataset_id + "_all_line_pair";
            xai::emit_line_pair(avg, "average correlation", mx, "correlation max", model_labels,
                                stem, dataset_id + ": average vs max-importance correlation");
            manifest.add(stem + ".csv", "plot-data", "report");
            manifest.add(stem + ".svg", "plot", "report");
        }

        // per-model comparative chart of the two explainers' max-importance
        // magnitudes across the repeat-0 test instances
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const int r0 = cells[i]->repeats[0].repeat;
            const std::string base = o.out_dir + "/explanations/" + dataset_id + "_" +
                                     to_string(cells[i]->model) + "_r" + std::to_string(r0);
            if (!fs::exists(base + "_shap.csv")) continue;
            const auto shap = xai::load_explanations(base + "_shap.csv");
            const auto lime = xai::load_explanations(base + "_lime.csv");
            const Eigen::VectorXd a = xai::max_importance_series(shap);
            const Eigen::VectorXd b = xai::max_importance_series(lime);
            if (a.size() < 2) continue;
            std::vector<std::string> idx_labels;
            for (Eigen::Index k = 0; k < a.size(); ++k) idx_labels.push_back(std::to_string(k));
            stem = dir + "/" + dataset_id + "_" + to_string(cells[i]->model) + "_line_compare";
            xai::emit_line_pair(a, "shap", b, "lime", idx_labels, stem,
                                dataset_id + " / " + to_string(cells[i]->model) +
                                    ": max importance per instance");
            manifest.add(stem + ".csv", "plot-data", "report");
            manifest.add(stem + ".svg", "plot", "report");
        }
    }
}

int run_compare(const std::string& path_a, const std::string& path_b, const CommonOpts& o) {
    fs::create_directories(o.out_dir);
    const auto a = xai::load_explanations(path_a);
    const auto b = xai::load_explanations(path_b);
    const xai::CorrelationReport report = xai::compare_explanations(a, b);
    const std::string path = o.out_dir + "/correlation_report.csv";
    xai::export_correlation_report(report, path);
    Manifest manifest;
    manifest.add(path, "results", "compare");
    write_manifest(o, nullptr, manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"xaid: train tabular models, explain with Kernel SHAP and LIME, and measure "
                 "explainer dissonance"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string compare_a, compare_b;

    auto* train_explain = app.add_subcommand(
        "train-explain", "train models and export SHAP/LIME explanation tables");
    auto* compare = app.add_subcommand("compare", "correlate two explanation tables");
    auto* study1 = app.add_subcommand("study1", "predict model accuracy from explainer correlation");
    auto* study2 = app.add_subcommand("study2", "compare variance of average vs max correlation");
    auto* report = app.add_subcommand("report", "emit heatmaps, scatter and line charts");
    auto* run_all = app.add_subcommand("run-all", "full pipeline: all stages into one directory");

    for (auto* cmd : {train_explain, study1, study2, report, run_all}) add_common(cmd, o, true);
    compare->add_option("--a", compare_a, "first explanation CSV")->required();
    compare->add_option("--b", compare_b, "second explanation CSV")->required();
    compare->add_option("--out", o.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize: --help exits 0, every usage error exits 1
        return app.exit(e) == 0 ? 0 : 1;
    }

    std::string stage = "setup";
    try {
        if (compare->parsed()) {
            stage = "compare";
            return run_compare(compare_a, compare_b, o);
        }

        const xai::ExperimentConfig config = resolve_config(o);
        fs::create_directories(o.out_dir);
        Manifest manifest;

        stage = "preliminary";
        const xai::PreliminaryResults prelim = preliminary_stage(o, config, manifest);
        if (study1->parsed() || run_all->parsed()) {
            stage = "study1";
            study1_stage(o, config, prelim, manifest);
        }
        if (study2->parsed() || run_all->parsed()) {
            stage = "study2";
            study2_stage(o, prelim, manifest);
        }
        if (report->parsed() || run_all->parsed()) {
            stage = "report";
            report_stage(o, prelim, manifest);
        }
        stage = "manifest";
        write_manifest(o, &config, manifest);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error in stage '" << stage << "': " << e.what() << '\n';
        return 2;
    }
}

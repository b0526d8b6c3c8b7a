#include "xai/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <numeric>

namespace xai {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (datasets.empty()) throw ValidationError("config: no datasets");
    if (first_level_models.empty()) throw ValidationError("config: no first-level models");
    if (n < 1) throw ValidationError("config: n must be >= 1");
    if (m < 1) throw ValidationError("config: m must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("config: p must lie in (0,1)");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("config: test_fraction must lie in (0,1)");
    if (jobs < 1) throw ValidationError("config: jobs must be >= 1");
}

namespace {

json explainer_to_json(const ExplainerConfig& c) {
    return json{{"n_samples", c.n_samples},
                {"kernel_width", c.kernel_width},
                {"background_size", c.background_size},
                {"ridge_penalty", c.ridge_penalty}};
}

void explainer_from_json(const json& j, ExplainerConfig& c) {
    if (j.contains("n_samples")) c.n_samples = j["n_samples"].get<int>();
    if (j.contains("kernel_width")) c.kernel_width = j["kernel_width"].get<double>();
    if (j.contains("background_size")) c.background_size = j["background_size"].get<int>();
    if (j.contains("ridge_penalty")) c.ridge_penalty = j["ridge_penalty"].get<double>();
}

}  // namespace

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }

    ExperimentConfig c;
    for (const auto& d : j.at("datasets")) {
        DatasetSpec spec;
        spec.path_or_builtin = d.at("name").get<std::string>();
        if (d.contains("target")) spec.target_column = d["target"].get<std::string>();
        if (d.contains("drop"))
            spec.drop_columns = d["drop"].get<std::vector<std::string>>();
        if (d.contains("task")) spec.task_kind = task_kind_from_string(d["task"].get<std::string>());
        c.datasets.push_back(std::move(spec));
    }
    for (const auto& name : j.at("models"))
        c.first_level_models.push_back(model_kind_from_string(name.get<std::string>()));
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("p")) c.p = j["p"].get<double>();
    if (j.contains("m")) c.m = j["m"].get<int>();
    if (j.contains("seed")) c.master_seed = j["seed"].get<std::uint64_t>();
    if (j.contains("test_fraction")) c.test_fraction = j["test_fraction"].get<double>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (j.contains("shap")) explainer_from_json(j["shap"], c.shap);
    if (j.contains("lime")) explainer_from_json(j["lime"], c.lime);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& config) {
    json datasets = json::array();
    for (const auto& d : config.datasets)
        datasets.push_back(json{{"name", d.path_or_builtin},
                                {"target", d.target_column},
                                {"drop", d.drop_columns},
                                {"task", to_string(d.task_kind)}});
    json models = json::array();
    for (ModelKind k : config.first_level_models) models.push_back(to_string(k));
    json j{{"datasets", datasets},
           {"models", models},
           {"n", config.n},
           {"p", config.p},
           {"m", config.m},
           {"seed", config.master_seed},
           {"test_fraction", config.test_fraction},
           {"jobs", config.jobs},
           {"shap", explainer_to_json(config.shap)},
           {"lime", explainer_to_json(config.lime)}};
    return j.dump(2);
}

TabularDataset resolve_dataset(const DatasetSpec& spec, const std::string& data_dir) {
    struct Builtin {
        const char* name;
        const char* file;
        const char* target;
        TaskKind task;
    };
    static const Builtin builtins[] = {
        {"iris", "iris.csv", "species", TaskKind::classification},
        {"diabetes", "diabetes.csv", "target", TaskKind::regression},
        {"digits-small", "digits_small.csv", "digit", TaskKind::classification},
    };
    for (const auto& b : builtins) {
        if (spec.path_or_builtin == b.name && !std::filesystem::exists(spec.path_or_builtin)) {
            const std::string path = data_dir + "/" + b.file;
            const std::string target =
                spec.target_column.empty() ? b.target : spec.target_column;
            TabularDataset ds = load_csv(path, target, spec.drop_columns, b.task);
            ds.source_id = b.name;
            return ds;
        }
    }
    if (spec.target_column.empty())
        throw ValidationError("dataset " + spec.path_or_builtin + " requires a target column");
    return load_csv(spec.path_or_builtin, spec.target_column, spec.drop_columns, spec.task_kind);
}

double CellResult::mean_accuracy() const {
    double s = 0.0;
    for (const auto& r : repeats) s += r.accuracy;
    return s / static_cast<double>(repeats.size());
}

double CellResult::mean_avg_correlation() const {
    double s = 0.0;
    for (const auto& r : repeats) s += r.avg_correlation;
    return s / static_cast<double>(repeats.size());
}

double CellResult::mean_correlation_max() const {
    double s = 0.0;
    for (const auto& r : repeats) s += r.correlation_max_effective;
    return s / static_cast<double>(repeats.size());
}

const CellResult* PreliminaryResults::find(const std::string& dataset_id, ModelKind model) const {
    for (const auto& cell : cells)
        if (cell.dataset_id == dataset_id && cell.model == model) return &cell;
    return nullptr;
}

std::vector<const CellResult*> PreliminaryResults::cells_for(const std::string& dataset_id) const {
    std::vector<const CellResult*> out;
    for (const auto& cell : cells)
        if (cell.dataset_id == dataset_id && cell.usable()) out.push_back(&cell);
    return out;
}

namespace {

struct RepeatOutcome {
    bool ok = false;
    RepeatRecord record;
    std::string error;
    std::vector<std::string> files;
};

RepeatOutcome run_repeat(const ExperimentConfig& config, const TabularDataset& dataset,
                         ModelKind kind, int model_index, int repeat,
                         const std::string& out_dir) {
    RepeatOutcome outcome;
    try {
        const std::uint64_t split_seed =
            sub_seed(config.master_seed, static_cast<std::uint64_t>(repeat));
        auto [train_raw, test_raw] = train_test_split(dataset, config.test_fraction, split_seed);
        ScaledSplit split = scale(train_raw, test_raw, ScalerKind::standard);

        const std::uint64_t model_seed =
            sub_seed(split_seed, static_cast<std::uint64_t>(model_index));
        TrainedModel model;
        try {
            model = train(kind, Hyperparams{}, split.train, model_seed);
        } catch (const NegativeFeaturesError&) {
            // min-max fallback for models that require non-negative inputs
            split = scale(train_raw, test_raw, ScalerKind::min_max);
            model = train(kind, Hyperparams{}, split.train, model_seed);
        }

        RepeatRecord rec;
        rec.repeat = repeat;
        rec.accuracy = model.score(split.test);

        const std::uint64_t cell_seed = sub_seed(model_seed, 0xce11ULL);
        ExplainerConfig shap_cfg = config.shap;
        shap_cfg.explainer_id = "shap";
        shap_cfg.seed = sub_seed(cell_seed, 1);
        ExplainerConfig lime_cfg = config.lime;
        lime_cfg.explainer_id = "lime";
        lime_cfg.seed = sub_seed(cell_seed, 2);

        ExplanationTable shap_table =
            explain_kernel_shap(model, split.train, split.test.features, shap_cfg);
        ExplanationTable lime_table =
            explain_lime(model, split.train, split.test.features, lime_cfg);

        rec.report = compare_explanations(shap_table, lime_table);
        rec.avg_correlation = rec.report.average;
        rec.correlation_max_effective = rec.report.correlation_max.effective();

        if (!out_dir.empty()) {
            const std::string stem = out_dir + "/explanations/" + dataset.source_id + "_" +
                                     to_string(kind) + "_r" + std::to_string(repeat);
            std::filesystem::create_directories(out_dir + "/explanations");
            export_explanations(shap_table, stem + "_shap.csv");
            export_explanations(lime_table, stem + "_lime.csv");
            outcome.files.push_back(stem + "_shap.csv");
            outcome.files.push_back(stem + "_lime.csv");
        }
        outcome.ok = true;
        outcome.record = std::move(rec);
    } catch (const std::exception& e) {
        outcome.error = std::string("repeat ") + std::to_string(repeat) + ": " + e.what();
    }
    return outcome;
}

}  // namespace

PreliminaryResults run_preliminary(const ExperimentConfig& config, const std::string& data_dir,
                                   const std::string& out_dir) {
    config.validate();
    PreliminaryResults results;
    results.config = config;

    std::vector<TabularDataset> datasets;
    for (const auto& spec : config.datasets) {
        datasets.push_back(resolve_dataset(spec, data_dir));
        results.dataset_ids.push_back(datasets.back().source_id);
    }

    struct Job {
        int dataset_index;
        int model_index;
        int repeat;
    };
    std::vector<Job> jobs;
    for (int d = 0; d < static_cast<int>(datasets.size()); ++d)
        for (int mi = 0; mi < static_cast<int>(config.first_level_models.size()); ++mi)
            for (int r = 0; r < config.n; ++r) jobs.push_back({d, mi, r});

    std::vector<RepeatOutcome> outcomes(jobs.size());
    const int workers = std::max(1, config.jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            outcomes[i] = run_repeat(config, datasets[static_cast<std::size_t>(job.dataset_index)],
                                     config.first_level_models[static_cast<std::size_t>(job.model_index)],
                                     job.model_index, job.repeat, out_dir);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::future<void>> pool;
        for (int w = 0; w < workers; ++w)
            pool.push_back(std::async(std::launch::async, worker));
        for (auto& f : pool) f.get();
    }

    // reduce in canonical (dataset, model, repeat) order
    for (int d = 0; d < static_cast<int>(datasets.size()); ++d) {
        for (int mi = 0; mi < static_cast<int>(config.first_level_models.size()); ++mi) {
            CellResult cell;
            cell.dataset_id = results.dataset_ids[static_cast<std::size_t>(d)];
            cell.model = config.first_level_models[static_cast<std::size_t>(mi)];
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].dataset_index != d || jobs[i].model_index != mi) continue;
                if (outcomes[i].ok) {
                    cell.repeats.push_back(outcomes[i].record);
                    for (auto& f : outcomes[i].files) results.exported_files.push_back(f);
                } else {
                    cell.errors.push_back(outcomes[i].error);
                }
            }
            std::sort(cell.repeats.begin(), cell.repeats.end(),
                      [](const RepeatRecord& a, const RepeatRecord& b) {
                          return a.repeat < b.repeat;
                      });
            results.cells.push_back(std::move(cell));
        }
    }
    std::sort(results.exported_files.begin(), results.exported_files.end());
    return results;
}

double loo_score(ModelKind kind, const Eigen::VectorXd& features, const Eigen::VectorXd& targets) {
    if (task_of(kind) != TaskKind::regression)
        throw ValidationError("loo_score requires a regression kind, got " + to_string(kind));
    const Eigen::Index n = features.size();
    if (n != targets.size()) throw ValidationError("loo_score: length mismatch");
    if (n < 3) throw ValidationError("loo_score requires at least 3 points");

    Eigen::VectorXd preds(n);
    for (Eigen::Index held = 0; held < n; ++held) {
        TabularDataset fold;
        fold.feature_names = {"avg_correlation"};
        fold.task_kind = TaskKind::regression;
        fold.source_id = "second_level";
        fold.features.resize(n - 1, 1);
        fold.target.resize(n - 1);
        Eigen::Index w = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == held) continue;
            fold.features(w, 0) = features(i);
            fold.target(w) = targets(i);
            ++w;
        }
        const TrainedModel model = train(kind, Hyperparams{}, fold, 0);
        Eigen::MatrixXd probe(1, 1);
        probe(0, 0) = features(held);
        preds(held) = model.predict(probe)(0);
    }
    const double mean = targets.mean();
    const double ss_tot = (targets.array() - mean).square().sum();
    if (ss_tot == 0.0) throw ValidationError("loo_score: targets have zero variance");
    return 1.0 - (targets - preds).squaredNorm() / ss_tot;
}

Study1Outcome run_accuracy_prediction_study(const PreliminaryResults& prelim,
                                            const std::vector<ModelKind>& second_kinds,
                                            double p) {
    Study1Outcome outcome;
    outcome.p = p;
    int above = 0, total = 0;
    for (const auto& dataset_id : prelim.dataset_ids) {
        const auto cells = prelim.cells_for(dataset_id);
        if (cells.size() < 3)
            throw ValidationError("study 1 needs >= 3 usable model rows for " + dataset_id);
        Eigen::VectorXd x(static_cast<Eigen::Index>(cells.size()));
        Eigen::VectorXd y(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            x(static_cast<Eigen::Index>(i)) = cells[i]->mean_avg_correlation();
            y(static_cast<Eigen::Index>(i)) = cells[i]->mean_accuracy();
        }
        Study1Outcome::PerDataset per;
        per.dataset_id = dataset_id;
        for (ModelKind kind : second_kinds) {
            SecondLevelScore s;
            s.kind = kind;
            s.score = loo_score(kind, x, y);
            s.supports_hypothesis = s.score > p;
            if (s.supports_hypothesis) ++above;
            ++total;
            per.scores.push_back(s);
        }
        outcome.per_dataset.push_back(std::move(per));
    }
    // supported only when above-threshold scores are the majority
    outcome.hypothesis_supported = total > 0 && 2 * above > total;
    return outcome;
}

Study2Outcome run_max_variance_study(const PreliminaryResults& prelim) {
    Study2Outcome outcome;
    outcome.hypothesis_supported = true;
    for (const auto& dataset_id : prelim.dataset_ids) {
        const auto cells = prelim.cells_for(dataset_id);
        if (cells.size() < 2)
            throw ValidationError("study 2 needs >= 2 usable model rows for " + dataset_id);
        Eigen::VectorXd avg(static_cast<Eigen::Index>(cells.size()));
        Eigen::VectorXd mx(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            avg(static_cast<Eigen::Index>(i)) = cells[i]->mean_avg_correlation();
            mx(static_cast<Eigen::Index>(i)) = cells[i]->mean_correlation_max();
        }
        Study2Outcome::PerDataset per;
        per.dataset_id = dataset_id;
        per.var_avg = sample_variance(avg);
        per.var_max = sample_variance(mx);
        per.max_more_consistent = per.var_max < per.var_avg;  // strict, ties do not count
        if (!per.max_more_consistent) outcome.hypothesis_supported = false;
        outcome.per_dataset.push_back(std::move(per));
    }
    return outcome;
}

void export_preliminary_csv(const PreliminaryResults& prelim, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write preliminary results: " + path);
    out << "dataset,model,avg_correlation,correlation_max,accuracy,repeats,errors\n";
    for (const auto& cell : prelim.cells) {
        out << cell.dataset_id << ',' << to_string(cell.model) << ',';
        if (cell.usable())
            out << format_double(cell.mean_avg_correlation()) << ','
                << format_double(cell.mean_correlation_max()) << ','
                << format_double(cell.mean_accuracy());
        else
            out << ",,";
        out << ',' << cell.repeats.size() << ',' << cell.errors.size() << '\n';
    }
}

void export_study1_csv(const Study1Outcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write study 1 results: " + path);
    out << "dataset,second_level_model,loo_r2,supports_hypothesis\n";
    for (const auto& per : outcome.per_dataset)
        for (const auto& s : per.scores)
            out << per.dataset_id << ',' << to_string(s.kind) << ',' << format_double(s.score)
                << ',' << (s.supports_hypothesis ? "true" : "false") << '\n';
    out << "#p," << format_double(outcome.p) << ",,\n";
    out << "#hypothesis_supported," << (outcome.hypothesis_supported ? "true" : "false")
        << ",,\n";
}

void export_study2_csv(const Study2Outcome& outcome, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write study 2 results: " + path);
    out << "dataset,var_avg_correlation,var_correlation_max,max_more_consistent\n";
    for (const auto& per : outcome.per_dataset)
        out << per.dataset_id << ',' << format_double(per.var_avg) << ','
            << format_double(per.var_max) << ',' << (per.max_more_consistent ? "true" : "false")
            << '\n';
    out << "#hypothesis_supported," << (outcome.hypothesis_supported ? "true" : "false")
        << ",,\n";
}

}  // namespace xai

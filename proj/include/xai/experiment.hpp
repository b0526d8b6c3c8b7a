#ifndef XAI_EXPERIMENT_HPP
#define XAI_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xai/dissonance.hpp"
#include "xai/models.hpp"

namespace xai {

struct DatasetSpec {
    std::string path_or_builtin;  // file path, or one of: iris, diabetes, digits-small
    std::string target_column;
    std::vector<std::string> drop_columns;
    TaskKind task_kind = TaskKind::regression;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<ModelKind> first_level_models;
    ExplainerConfig shap = ExplainerConfig::shap_defaults();
    ExplainerConfig lime = ExplainerConfig::lime_defaults();
    int n = 10;            // repeats per preliminary step
    double p = 0.5;        // support threshold for study 1
    int m = 5;             // outer repetition count
    std::uint64_t master_seed = 0;
    double test_fraction = 0.2;
    int jobs = 1;

    void validate() const;
};

ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Resolves a builtin dataset name or file path to a loaded dataset.
/// data_dir supplies the bundled fixtures for builtin names.
TabularDataset resolve_dataset(const DatasetSpec& spec, const std::string& data_dir);

struct RepeatRecord {
    int repeat = 0;
    double accuracy = 0.0;
    double avg_correlation = 0.0;
    double correlation_max_effective = 0.0;
    CorrelationReport report;
};

struct CellResult {
    std::string dataset_id;
    ModelKind model = ModelKind::ols_linear;
    std::vector<RepeatRecord> repeats;  // successful repeats only
    std::vector<std::string> errors;    // one message per failed repeat
    bool usable() const { return !repeats.empty(); }
    double mean_accuracy() const;
    double mean_avg_correlation() const;
    double mean_correlation_max() const;
};

struct PreliminaryResults {
    ExperimentConfig config;
    std::vector<std::string> dataset_ids;
    std::vector<CellResult> cells;  // canonical (dataset, model) order
    std::vector<std::string> exported_files;

    const CellResult* find(const std::string& dataset_id, ModelKind model) const;
    std::vector<const CellResult*> cells_for(const std::string& dataset_id) const;
};

struct SecondLevelScore {
    ModelKind kind = ModelKind::ols_linear;
    double score = 0.0;
    bool supports_hypothesis = false;  // score > p
};

struct Study1Outcome {
    struct PerDataset {
        std::string dataset_id;
        std::vector<SecondLevelScore> scores;
    };
    std::vector<PerDataset> per_dataset;
    double p = 0.5;
    bool hypothesis_supported = false;  // over half of all second-level scores above p
};

struct Study2Outcome {
    struct PerDataset {
        std::string dataset_id;
        double var_avg = 0.0;
        double var_max = 0.0;
        bool max_more_consistent = false;  // strict var_max < var_avg
    };
    std::vector<PerDataset> per_dataset;
    bool hypothesis_supported = false;  // max_more_consistent for every dataset
};

/// Runs the preliminary protocol: per (dataset, model, repeat) split, train,
/// score, explain test instances with both explainers, and compare. Failures
/// are recorded per cell and the run continues. Explanation tables are
/// exported under out_dir when it is non-empty.
PreliminaryResults run_preliminary(const ExperimentConfig& config, const std::string& data_dir,
                                   const std::string& out_dir);

/// Study 1: per dataset, regress first-level accuracy on average correlation
/// (one row per first-level model) and evaluate each second-level kind by
/// leave-one-out cross-validated R^2.
Study1Outcome run_accuracy_prediction_study(const PreliminaryResults& prelim,
                                            const std::vector<ModelKind>& second_kinds, double p);

/// Study 2: per dataset, sample variances of the models' average correlations
/// and correlation maxima.
Study2Outcome run_max_variance_study(const PreliminaryResults& prelim);

/// Leave-one-out cross-validated R^2 of a regression kind on a 1-feature
/// dataset. Pooled held-out predictions are scored against the targets.
double loo_score(ModelKind kind, const Eigen::VectorXd& features, const Eigen::VectorXd& targets);

void export_preliminary_csv(const PreliminaryResults& prelim, const std::string& path);
void export_study1_csv(const Study1Outcome& outcome, const std::string& path);
void export_study2_csv(const Study2Outcome& outcome, const std::string& path);

}  // namespace xai

#endif

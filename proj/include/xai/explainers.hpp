#ifndef XAI_EXPLAINERS_HPP
#define XAI_EXPLAINERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "xai/models.hpp"

namespace xai {

struct ExplainerConfig {
    std::string explainer_id;   // "shap" or "lime"
    int n_samples = 0;          // coalitions (shap) or perturbations (lime)
    double kernel_width = 0.0;  // lime; 0 means 0.75 * sqrt(M) at explain time
    int background_size = 100;  // shap
    double ridge_penalty = 1.0; // lime surrogate
    std::uint64_t seed = 0;

    static ExplainerConfig shap_defaults(std::uint64_t seed = 0);
    static ExplainerConfig lime_defaults(std::uint64_t seed = 0);
};

struct ExplanationRow {
    int instance = 0;
    std::string feature;
    double value = 0.0;  // the feature's value at that instance
    double score = 0.0;  // importance
    int rank = 0;        // 0 = largest |score| within the instance
};

/// Per-instance, per-feature importance scores from one explainer.
/// Rows are ordered by (instance, rank); within an instance ranks follow
/// non-increasing |score| with feature index breaking ties.
struct ExplanationTable {
    std::string explainer_id;
    std::string source_id;
    std::string model_kind;
    std::vector<std::string> feature_names;
    int n_instances = 0;
    std::vector<ExplanationRow> rows;
    std::vector<double> surrogate_r2;  // lime: weighted R^2 per instance; empty for shap

    /// Scores as an (instances x features) matrix, columns in feature_names order.
    Eigen::MatrixXd score_matrix() const;

    void validate() const;
};

/// Builds a table from a raw score matrix, assigning ranks per instance.
ExplanationTable make_explanation_table(const std::string& explainer_id,
                                        const std::string& source_id,
                                        const std::string& model_kind,
                                        const std::vector<std::string>& feature_names,
                                        const Eigen::MatrixXd& scores,
                                        const Eigen::MatrixXd& instance_values);

/// Kernel SHAP. When 2^M <= n_samples every coalition is enumerated and the
/// scores equal exact Shapley values; otherwise coalitions are drawn by
/// Shapley-kernel-weighted size sampling. The efficiency constraint
/// sum(phi) = f(x) - f(background mean) is eliminated by substitution, so it
/// holds to solver precision for every instance.
ExplanationTable explain_kernel_shap(const TrainedModel& model, const TabularDataset& background,
                                     const Eigen::MatrixXd& instances,
                                     const ExplainerConfig& config);

/// Brute-force Shapley values over all 2^M coalitions; absent features are
/// imputed by background column means. Test oracle, M <= 20.
Eigen::VectorXd shapley_exact(const TrainedModel& model, const TabularDataset& background,
                              const Eigen::VectorXd& instance);

/// LIME: Gaussian perturbations around each instance scaled by training
/// stddev, exponential kernel weights in standardized units, weighted ridge
/// surrogate. Zero-stddev features are never perturbed and score 0.
ExplanationTable explain_lime(const TrainedModel& model, const TabularDataset& train_reference,
                              const Eigen::MatrixXd& instances, const ExplainerConfig& config);

/// CSV with header explainer,instance,rank,feature,value,score; rows sorted by
/// (instance, rank); scores at 17 significant digits.
void export_explanations(const ExplanationTable& table, const std::string& path);

ExplanationTable load_explanations(const std::string& path);

}  // namespace xai

#endif

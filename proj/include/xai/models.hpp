#ifndef XAI_MODELS_HPP
#define XAI_MODELS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "xai/dataset.hpp"

namespace xai {

enum class ModelKind {
    // regression
    ols_linear,
    ridge,
    elastic_net,
    gradient_boosting_reg,
    // classification
    logistic_regression,
    gaussian_nb,
    multinomial_nb,
    knn_classifier,
    decision_tree,
    random_forest,
    gradient_boosting_clf,
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
TaskKind task_of(ModelKind kind);
std::vector<ModelKind> regression_kinds();
std::vector<ModelKind> classification_kinds();

/// Key -> value map with per-kind defaults. Unknown keys and out-of-range
/// values are rejected at train time.
class Hyperparams {
public:
    static Hyperparams defaults(ModelKind kind);

    Hyperparams& set(const std::string& key, double value);
    double get(const std::string& key) const;
    bool has(const std::string& key) const;
    const std::map<std::string, double>& entries() const { return values_; }

private:
    std::map<std::string, double> values_;
};

namespace detail {
class ModelImpl;
}

/// A fitted predictor with a uniform predict/score contract. Immutable after
/// fit; predict may be called concurrently.
class TrainedModel {
public:
    TrainedModel() = default;

    ModelKind kind() const;
    TaskKind task_kind() const;
    const std::vector<std::string>& feature_names() const;
    int n_classes() const;

    /// Regression: fitted value per row. Classification: predicted class index.
    Eigen::VectorXd predict(const Eigen::MatrixXd& instances) const;

    /// Classification only: rows sum to 1, entries non-negative.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& instances) const;

    /// R^2 for regression, fraction correct for classification.
    double score(const TabularDataset& test) const;

private:
    friend TrainedModel train(ModelKind, const Hyperparams&, const TabularDataset&, std::uint64_t);
    std::shared_ptr<const detail::ModelImpl> impl_;
    std::vector<std::string> feature_names_;
};

TrainedModel train(ModelKind kind, const Hyperparams& params, const TabularDataset& train_data,
                   std::uint64_t seed);

/// Thrown when multinomial_nb sees negative features; the pipeline treats it
/// as the signal to rescale with min_max and retrain.
class NegativeFeaturesError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace xai

#endif

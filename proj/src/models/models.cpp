#include "xai/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "model_impl.hpp"

namespace xai {

namespace {

const std::map<std::string, ModelKind>& kind_names() {
    static const std::map<std::string, ModelKind> names = {
        {"ols_linear", ModelKind::ols_linear},
        {"ridge", ModelKind::ridge},
        {"elastic_net", ModelKind::elastic_net},
        {"gradient_boosting_reg", ModelKind::gradient_boosting_reg},
        {"logistic_regression", ModelKind::logistic_regression},
        {"gaussian_nb", ModelKind::gaussian_nb},
        {"multinomial_nb", ModelKind::multinomial_nb},
        {"knn_classifier", ModelKind::knn_classifier},
        {"decision_tree", ModelKind::decision_tree},
        {"random_forest", ModelKind::random_forest},
        {"gradient_boosting_clf", ModelKind::gradient_boosting_clf},
    };
    return names;
}

struct ParamRange {
    double lo;
    double hi;
};

// allowed keys with valid ranges, per kind
const std::map<ModelKind, std::map<std::string, std::pair<double, ParamRange>>>& param_specs() {
    using Spec = std::map<std::string, std::pair<double, ParamRange>>;
    static const std::map<ModelKind, Spec> specs = {
        {ModelKind::ols_linear, {}},
        {ModelKind::ridge, {{"penalty", {1.0, {0.0, 1e12}}}}},
        {ModelKind::elastic_net,
         {{"penalty", {1.0, {0.0, 1e12}}},
          {"l1_ratio", {0.5, {0.0, 1.0}}},
          {"max_sweeps", {1000, {1, 1e6}}},
          {"tol", {1e-6, {0.0, 1.0}}}}},
        {ModelKind::gradient_boosting_reg,
         {{"n_trees", {100, {1, 1e4}}},
          {"max_depth", {3, {0, 64}}},
          {"learning_rate", {0.1, {1e-6, 10.0}}},
          {"min_leaf", {1, {1, 1e6}}}}},
        {ModelKind::logistic_regression,
         {{"penalty", {1e-4, {0.0, 1e12}}}, {"iterations", {500, {1, 1e6}}}}},
        {ModelKind::gaussian_nb, {{"var_smoothing", {1e-9, {0.0, 1.0}}}}},
        {ModelKind::multinomial_nb, {{"alpha", {1.0, {0.0, 1e6}}}}},
        {ModelKind::knn_classifier, {{"k", {5, {1, 1e6}}}}},
        {ModelKind::decision_tree,
         {{"max_depth", {10, {0, 64}}}, {"min_leaf", {1, {1, 1e6}}}}},
        {ModelKind::random_forest,
         {{"n_trees", {100, {1, 1e4}}},
          {"max_depth", {10, {0, 64}}},
          {"min_leaf", {1, {1, 1e6}}},
          {"bootstrap", {1, {0, 1}}},
          {"feature_fraction", {0.0, {0.0, 1.0}}}}},
        {ModelKind::gradient_boosting_clf,
         {{"n_trees", {100, {1, 1e4}}},
          {"max_depth", {3, {0, 64}}},
          {"learning_rate", {0.1, {1e-6, 10.0}}},
          {"min_leaf", {1, {1, 1e6}}}}},
    };
    return specs;
}

void validate_params(ModelKind kind, const Hyperparams& params) {
    const auto& spec = param_specs().at(kind);
    for (const auto& [key, value] : params.entries()) {
        auto it = spec.find(key);
        if (it == spec.end())
            throw ValidationError("unknown hyperparameter '" + key + "' for " + to_string(kind));
        const auto& range = it->second.second;
        if (!(value >= range.lo && value <= range.hi))
            throw ValidationError("hyperparameter '" + key + "' = " + std::to_string(value) +
                                  " out of range for " + to_string(kind));
    }
}

}  // namespace

std::string to_string(ModelKind kind) {
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name;
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    auto it = kind_names().find(s);
    if (it == kind_names().end()) throw ValidationError("unknown model kind: " + s);
    return it->second;
}

TaskKind task_of(ModelKind kind) {
    switch (kind) {
        case ModelKind::ols_linear:
        case ModelKind::ridge:
        case ModelKind::elastic_net:
        case ModelKind::gradient_boosting_reg:
            return TaskKind::regression;
        default:
            return TaskKind::classification;
    }
}

std::vector<ModelKind> regression_kinds() {
    return {ModelKind::ols_linear, ModelKind::ridge, ModelKind::elastic_net,
            ModelKind::gradient_boosting_reg};
}

std::vector<ModelKind> classification_kinds() {
    return {ModelKind::logistic_regression, ModelKind::gaussian_nb,  ModelKind::multinomial_nb,
            ModelKind::knn_classifier,      ModelKind::decision_tree, ModelKind::random_forest,
            ModelKind::gradient_boosting_clf};
}

Hyperparams Hyperparams::defaults(ModelKind kind) {
    Hyperparams p;
    for (const auto& [key, spec] : param_specs().at(kind)) p.values_[key] = spec.first;
    return p;
}

Hyperparams& Hyperparams::set(const std::string& key, double value) {
    values_[key] = value;
    return *this;
}

double Hyperparams::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError("hyperparameter not set: " + key);
    return it->second;
}

bool Hyperparams::has(const std::string& key) const { return values_.count(key) != 0; }

namespace detail {
// fitters defined across the model translation units
std::unique_ptr<ModelImpl> fit_linear_model(ModelKind, const Hyperparams&, const Eigen::MatrixXd&,
                                            const Eigen::VectorXd&);
std::unique_ptr<ModelImpl> fit_logistic(const Hyperparams&, const Eigen::MatrixXd&,
                                        const Eigen::VectorXd&, int);
std::unique_ptr<ModelImpl> fit_gaussian_nb(const Hyperparams&, const Eigen::MatrixXd&,
                                           const Eigen::VectorXd&, int);
std::unique_ptr<ModelImpl> fit_multinomial_nb(const Hyperparams&, const Eigen::MatrixXd&,
                                              const Eigen::VectorXd&, int);
std::unique_ptr<ModelImpl> fit_knn(const Hyperparams&, const Eigen::MatrixXd&,
                                   const Eigen::VectorXd&, int);
std::unique_ptr<ModelImpl> fit_decision_tree(const Hyperparams&, const Eigen::MatrixXd&,
                                             const Eigen::VectorXd&, TaskKind, int);
std::unique_ptr<ModelImpl> fit_random_forest(const Hyperparams&, const Eigen::MatrixXd&,
                                             const Eigen::VectorXd&, int, std::uint64_t);
std::unique_ptr<ModelImpl> fit_boosted_reg(const Hyperparams&, const Eigen::MatrixXd&,
                                           const Eigen::VectorXd&);
std::unique_ptr<ModelImpl> fit_boosted_clf(const Hyperparams&, const Eigen::MatrixXd&,
                                           const Eigen::VectorXd&, int);
}  // namespace detail

TrainedModel train(ModelKind kind, const Hyperparams& params, const TabularDataset& train_data,
                   std::uint64_t seed) {
    train_data.validate();
    if (train_data.n_rows() == 0) throw ValidationError("training dataset is empty");
    if (task_of(kind) != train_data.task_kind)
        throw ValidationError("task mismatch: " + to_string(kind) + " is a " +
                              to_string(task_of(kind)) + " kind but dataset " +
                              train_data.source_id + " is " + to_string(train_data.task_kind));

    Hyperparams full = Hyperparams::defaults(kind);
    for (const auto& [key, value] : params.entries()) full.set(key, value);
    validate_params(kind, full);

    const Eigen::MatrixXd& X = train_data.features;
    const Eigen::VectorXd& y = train_data.target;
    const int k = train_data.n_classes();

    std::unique_ptr<detail::ModelImpl> impl;
    switch (kind) {
        case ModelKind::ols_linear:
        case ModelKind::ridge:
        case ModelKind::elastic_net:
            impl = detail::fit_linear_model(kind, full, X, y);
            break;
        case ModelKind::gradient_boosting_reg:
            impl = detail::fit_boosted_reg(full, X, y);
            break;
        case ModelKind::logistic_regression:
            impl = detail::fit_logistic(full, X, y, k);
            break;
        case ModelKind::gaussian_nb:
            impl = detail::fit_gaussian_nb(full, X, y, k);
            break;
        case ModelKind::multinomial_nb:
            impl = detail::fit_multinomial_nb(full, X, y, k);
            break;
        case ModelKind::knn_classifier:
            impl = detail::fit_knn(full, X, y, k);
            break;
        case ModelKind::decision_tree:
            impl = detail::fit_decision_tree(full, X, y, train_data.task_kind, k);
            break;
        case ModelKind::random_forest:
            impl = detail::fit_random_forest(full, X, y, k, seed);
            break;
        case ModelKind::gradient_boosting_clf:
            impl = detail::fit_boosted_clf(full, X, y, k);
            break;
    }
    impl->n_features = static_cast<int>(train_data.n_features());

    TrainedModel model;
    model.impl_ = std::move(impl);
    model.feature_names_ = train_data.feature_names;
    return model;
}

ModelKind TrainedModel::kind() const {
    if (!impl_) throw ValidationError("model is not trained");
    return impl_->kind();
}

TaskKind TrainedModel::task_kind() const { return task_of(kind()); }

const std::vector<std::string>& TrainedModel::feature_names() const { return feature_names_; }

int TrainedModel::n_classes() const {
    if (!impl_) throw ValidationError("model is not trained");
    return impl_->n_classes();
}

namespace {
void check_shape(const detail::ModelImpl& impl, const Eigen::MatrixXd& X) {
    if (X.cols() != impl.n_features)
        throw ValidationError("instance feature count " + std::to_string(X.cols()) +
                              " does not match training feature count " +
                              std::to_string(impl.n_features));
}
}  // namespace

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& instances) const {
    if (!impl_) throw ValidationError("model is not trained");
    check_shape(*impl_, instances);
    return impl_->predict_values(instances);
}

Eigen::MatrixXd TrainedModel::predict_proba(const Eigen::MatrixXd& instances) const {
    if (!impl_) throw ValidationError("model is not trained");
    check_shape(*impl_, instances);
    return impl_->predict_proba(instances);
}

double TrainedModel::score(const TabularDataset& test) const {
    if (test.n_rows() == 0) throw ValidationError("test dataset is empty");
    if (test.task_kind != task_kind())
        throw ValidationError("task mismatch between model and test dataset");
    const Eigen::VectorXd pred = predict(test.features);
    if (task_kind() == TaskKind::classification) {
        double correct = 0.0;
        for (Eigen::Index i = 0; i < pred.size(); ++i)
            if (pred(i) == test.target(i)) correct += 1.0;
        return correct / static_cast<double>(pred.size());
    }
    const double mean = test.target.mean();
    const double ss_tot = (test.target.array() - mean).square().sum();
    if (ss_tot == 0.0)
        throw ValidationError("undefined R^2: test target has zero variance (" + test.source_id +
                              ")");
    const double ss_res = (test.target - pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

}  // namespace xai

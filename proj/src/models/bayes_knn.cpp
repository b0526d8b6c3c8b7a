#include <algorithm>
#include <cmath>
#include <numeric>

#include "model_impl.hpp"

namespace xai::detail {

namespace {

class GaussianNbModel final : public ModelImpl {
public:
    GaussianNbModel(Eigen::MatrixXd means, Eigen::MatrixXd vars, Eigen::VectorXd log_priors)
        : means_(std::move(means)), vars_(std::move(vars)), log_priors_(std::move(log_priors)) {}

    ModelKind kind() const override { return ModelKind::gaussian_nb; }
    int n_classes() const override { return static_cast<int>(log_priors_.size()); }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        const Eigen::Index n = X.rows();
        const int k = n_classes();
        Eigen::MatrixXd log_joint(n, k);
        for (int c = 0; c < k; ++c) {
            Eigen::ArrayXXd diff =
                (X.rowwise() - means_.row(c)).array().square().rowwise() /
                vars_.row(c).array();
            Eigen::ArrayXd ll =
                -0.5 * (diff.rowwise().sum() +
                        vars_.row(c).array().log().sum() +
                        static_cast<double>(X.cols()) * std::log(2.0 * M_PI));
            log_joint.col(c) = ll + log_priors_(c);
        }
        Eigen::VectorXd row_max = log_joint.rowwise().maxCoeff();
        log_joint.colwise() -= row_max;
        Eigen::MatrixXd p = log_joint.array().exp();
        return p.array().colwise() / p.rowwise().sum().array();
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    Eigen::MatrixXd means_;  // K x M
    Eigen::MatrixXd vars_;   // K x M
    Eigen::VectorXd log_priors_;
};

class MultinomialNbModel final : public ModelImpl {
public:
    MultinomialNbModel(Eigen::MatrixXd log_theta, Eigen::VectorXd log_priors)
        : log_theta_(std::move(log_theta)), log_priors_(std::move(log_priors)) {}

    ModelKind kind() const override { return ModelKind::multinomial_nb; }
    int n_classes() const override { return static_cast<int>(log_priors_.size()); }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        Eigen::MatrixXd log_joint = (X * log_theta_.transpose()).rowwise() +
                                    log_priors_.transpose();
        Eigen::VectorXd row_max = log_joint.rowwise().maxCoeff();
        log_joint.colwise() -= row_max;
        Eigen::MatrixXd p = log_joint.array().exp();
        return p.array().colwise() / p.rowwise().sum().array();
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    Eigen::MatrixXd log_theta_;  // K x M
    Eigen::VectorXd log_priors_;
};

class KnnModel final : public ModelImpl {
public:
    KnnModel(Eigen::MatrixXd train_x, Eigen::VectorXd train_y, int k, int n_classes)
        : train_x_(std::move(train_x)), train_y_(std::move(train_y)), k_(k),
          n_classes_(n_classes) {}

    ModelKind kind() const override { return ModelKind::knn_classifier; }
    int n_classes() const override { return n_classes_; }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        const Eigen::Index n = X.rows();
        const Eigen::Index nt = train_x_.rows();
        const int k = std::min<int>(k_, static_cast<int>(nt));
        Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(n, n_classes_);
        std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(nt));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index t = 0; t < nt; ++t)
                dist[static_cast<std::size_t>(t)] = {
                    (train_x_.row(t) - X.row(i)).squaredNorm(), static_cast<int>(t)};
            // distance ties resolve toward the lower training index
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            for (int j = 0; j < k; ++j)
                proba(i, static_cast<int>(train_y_(dist[static_cast<std::size_t>(j)].second))) +=
                    1.0 / k;
        }
        return proba;
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    Eigen::MatrixXd train_x_;
    Eigen::VectorXd train_y_;
    int k_;
    int n_classes_;
};

}  // namespace

std::unique_ptr<ModelImpl> fit_gaussian_nb(const Hyperparams& params, const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y, int n_classes) {
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(n_classes, m);
    Eigen::MatrixXd vars = Eigen::MatrixXd::Zero(n_classes, m);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int c = static_cast<int>(y(i));
        counts(c) += 1.0;
        means.row(c) += X.row(i);
    }
    means.array().colwise() /= counts.array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int c = static_cast<int>(y(i));
        vars.row(c) += (X.row(i) - means.row(c)).array().square().matrix();
    }
    vars.array().colwise() /= counts.array();
    const double max_var = std::max(vars.maxCoeff(), 1e-12);
    vars.array() += params.get("var_smoothing") * max_var;
    Eigen::VectorXd log_priors =
        (counts / static_cast<double>(X.rows())).array().log();
    return std::make_unique<GaussianNbModel>(means, vars, log_priors);
}

std::unique_ptr<ModelImpl> fit_multinomial_nb(const Hyperparams& params, const Eigen::MatrixXd& X,
                                              const Eigen::VectorXd& y, int n_classes) {
    if (X.minCoeff() < 0.0)
        throw NegativeFeaturesError(
            "multinomial_nb requires non-negative features; rescale with min_max");
    const double alpha = params.get("alpha");
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n_classes, m);
    Eigen::VectorXd class_counts = Eigen::VectorXd::Zero(n_classes);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int c = static_cast<int>(y(i));
        counts.row(c) += X.row(i);
        class_counts(c) += 1.0;
    }
    Eigen::MatrixXd log_theta(n_classes, m);
    for (int c = 0; c < n_classes; ++c) {
        const double total = counts.row(c).sum() + alpha * static_cast<double>(m);
        log_theta.row(c) = ((counts.row(c).array() + alpha) / total).log();
    }
    Eigen::VectorXd log_priors =
        (class_counts / static_cast<double>(X.rows())).array().log();
    return std::make_unique<MultinomialNbModel>(log_theta, log_priors);
}

std::unique_ptr<ModelImpl> fit_knn(const Hyperparams& params, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, int n_classes) {
    return std::make_unique<KnnModel>(X, y, static_cast<int>(params.get("k")), n_classes);
}

}  // namespace xai::detail

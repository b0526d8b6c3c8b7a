#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>

#include "model_impl.hpp"
#include "xai/detail/solvers.hpp"

namespace xai::detail {

namespace {

class LinearRegModel final : public ModelImpl {
public:
    LinearRegModel(ModelKind kind, Eigen::VectorXd coef, double intercept)
        : kind_(kind), coef_(std::move(coef)), intercept_(intercept) {}

    ModelKind kind() const override { return kind_; }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return (X * coef_).array() + intercept_;
    }

private:
    ModelKind kind_;
    Eigen::VectorXd coef_;
    double intercept_;
};

class SoftmaxModel final : public ModelImpl {
public:
    SoftmaxModel(Eigen::MatrixXd weights, Eigen::RowVectorXd bias)
        : weights_(std::move(weights)), bias_(std::move(bias)) {}

    ModelKind kind() const override { return ModelKind::logistic_regression; }
    int n_classes() const override { return static_cast<int>(weights_.cols()); }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        Eigen::MatrixXd logits = (X * weights_).rowwise() + bias_;
        Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
        logits.colwise() -= row_max;
        Eigen::MatrixXd expd = logits.array().exp();
        return expd.array().colwise() / expd.rowwise().sum().array();
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    Eigen::MatrixXd weights_;  // M x K
    Eigen::RowVectorXd bias_;
};

}  // namespace

std::unique_ptr<ModelImpl> fit_linear_model(ModelKind kind, const Hyperparams& params,
                                            const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (kind == ModelKind::ols_linear) {
        LinearFit fit = fit_linear(X, y, 0.0);
        if (fit.singular_fallback)
            std::cerr << "warning: singular normal equations for ols_linear; "
                         "falling back to ridge with penalty 1e-10\n";
        return std::make_unique<LinearRegModel>(kind, fit.coef, fit.intercept);
    }
    if (kind == ModelKind::ridge) {
        LinearFit fit = fit_linear(X, y, params.get("penalty"));
        return std::make_unique<LinearRegModel>(kind, fit.coef, fit.intercept);
    }
    ElasticNetFit fit =
        fit_elastic_net(X, y, params.get("penalty"), params.get("l1_ratio"),
                        static_cast<int>(params.get("max_sweeps")), params.get("tol"));
    return std::make_unique<LinearRegModel>(kind, fit.coef, fit.intercept);
}

std::unique_ptr<ModelImpl> fit_logistic(const Hyperparams& params, const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y, int n_classes) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    const double reg = params.get("penalty");
    const int iters = static_cast<int>(params.get("iterations"));

    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n_classes);
    for (Eigen::Index i = 0; i < n; ++i) Y(i, static_cast<int>(y(i))) = 1.0;

    // step size from the softmax cross-entropy Lipschitz bound
    Eigen::MatrixXd Xi(n, m + 1);
    Xi.leftCols(m) = X;
    Xi.col(m).setOnes();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xi.transpose() * Xi);
    const double lip = 0.5 * es.eigenvalues().maxCoeff() / static_cast<double>(n) + reg;
    const double step = 1.0 / lip;

    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m + 1, n_classes);
    for (int it = 0; it < iters; ++it) {
        Eigen::MatrixXd logits = Xi * W;
        Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
        logits.colwise() -= row_max;
        Eigen::MatrixXd P = logits.array().exp();
        P.array().colwise() /= P.rowwise().sum().array();

        Eigen::MatrixXd grad = Xi.transpose() * (P - Y) / static_cast<double>(n);
        grad.topRows(m) += reg * W.topRows(m);  // intercept unpenalized
        W -= step * grad;
    }
    return std::make_unique<SoftmaxModel>(W.topRows(m), W.row(m));
}

}  // namespace xai::detail

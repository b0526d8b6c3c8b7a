#include "xai/detail/solvers.hpp"

#include <algorithm>
#include <cmath>

namespace xai::detail {

LinearFit fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2_penalty) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    Eigen::MatrixXd Xi(n, m + 1);
    Xi.leftCols(m) = X;
    Xi.col(m).setOnes();

    Eigen::MatrixXd gram = Xi.transpose() * Xi;
    Eigen::VectorXd rhs = Xi.transpose() * y;

    LinearFit fit;
    double penalty = l2_penalty;
    if (penalty == 0.0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        lu.setThreshold(1e-10);
        if (lu.rank() < m + 1) {
            fit.singular_fallback = true;
            penalty = 1e-10;
        }
    }
    Eigen::MatrixXd reg = gram;
    reg.diagonal().head(m).array() += penalty;  // intercept unpenalized
    Eigen::VectorXd w = reg.ldlt().solve(rhs);
    fit.coef = w.head(m);
    fit.intercept = w(m);
    return fit;
}

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double enet_objective(const Eigen::MatrixXd& Xc, const Eigen::VectorXd& yc,
                      const Eigen::VectorXd& w, double alpha, double l1_ratio) {
    const double n = static_cast<double>(Xc.rows());
    const double rss = (yc - Xc * w).squaredNorm();
    return rss / (2.0 * n) + alpha * l1_ratio * w.lpNorm<1>() +
           0.5 * alpha * (1.0 - l1_ratio) * w.squaredNorm();
}

}  // namespace

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                              double l1_ratio, int max_sweeps, double tol) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    const double nd = static_cast<double>(n);

    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    Eigen::VectorXd yc = y.array() - y_mean;

    const Eigen::VectorXd col_sq = Xc.colwise().squaredNorm();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd resid = yc;  // yc - Xc*w

    ElasticNetFit fit;
    const double l1 = alpha * l1_ratio;
    const double l2 = alpha * (1.0 - l1_ratio);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (col_sq(j) == 0.0) {
                w(j) = 0.0;
                continue;
            }
            const double old = w(j);
            const double rho = (Xc.col(j).dot(resid) + old * col_sq(j)) / nd;
            const double next = soft_threshold(rho, l1) / (col_sq(j) / nd + l2);
            if (next != old) {
                resid += Xc.col(j) * (old - next);
                w(j) = next;
                max_delta = std::max(max_delta, std::abs(next - old));
            }
        }
        fit.objectives.push_back(enet_objective(Xc, yc, w, alpha, l1_ratio));
        fit.sweeps = sweep + 1;
        if (max_delta < tol) break;
    }
    fit.coef = w;
    fit.intercept = y_mean - x_mean * w;
    return fit;
}

double elastic_net_optimality_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& coef, double intercept,
                                       double alpha, double l1_ratio) {
    const double nd = static_cast<double>(X.rows());
    const Eigen::VectorXd resid = y - X * coef - Eigen::VectorXd::Constant(X.rows(), intercept);
    const Eigen::VectorXd grad =
        -(X.transpose() * resid) / nd + alpha * (1.0 - l1_ratio) * coef;
    const double l1 = alpha * l1_ratio;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < coef.size(); ++j) {
        double v;
        if (coef(j) > 0.0)
            v = std::abs(grad(j) + l1);
        else if (coef(j) < 0.0)
            v = std::abs(grad(j) - l1);
        else
            v = std::max(0.0, std::abs(grad(j)) - l1);
        worst = std::max(worst, v);
    }
    return worst;
}

WeightedRidgeFit fit_weighted_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, double penalty) {
    const Eigen::Index n = X.rows();
    const Eigen::Index m = X.cols();
    const double wsum = weights.sum();

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j)
        if (X.col(j).cwiseAbs().maxCoeff() > 0.0) active.push_back(j);

    Eigen::MatrixXd Xa(n, static_cast<Eigen::Index>(active.size()) + 1);
    for (std::size_t j = 0; j < active.size(); ++j)
        Xa.col(static_cast<Eigen::Index>(j)) = X.col(active[j]);
    Xa.col(static_cast<Eigen::Index>(active.size())).setOnes();

    const Eigen::MatrixXd Xw = weights.asDiagonal() * Xa;
    Eigen::MatrixXd gram = Xa.transpose() * Xw;
    gram.diagonal().head(static_cast<Eigen::Index>(active.size())).array() += penalty;
    const Eigen::VectorXd rhs = Xw.transpose() * y;
    const Eigen::VectorXd sol = gram.ldlt().solve(rhs);

    WeightedRidgeFit fit;
    fit.coef = Eigen::VectorXd::Zero(m);
    for (std::size_t j = 0; j < active.size(); ++j)
        fit.coef(active[j]) = sol(static_cast<Eigen::Index>(j));
    fit.intercept = sol(static_cast<Eigen::Index>(active.size()));

    const Eigen::VectorXd pred = Xa * sol;
    const double y_bar = weights.dot(y) / wsum;
    const double ss_res = (weights.array() * (y - pred).array().square()).sum();
    const double ss_tot = (weights.array() * (y.array() - y_bar).square()).sum();
    fit.weighted_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace xai::detail

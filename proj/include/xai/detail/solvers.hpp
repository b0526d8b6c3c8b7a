#ifndef XAI_DETAIL_SOLVERS_HPP
#define XAI_DETAIL_SOLVERS_HPP

#include <Eigen/Dense>
#include <vector>

namespace xai::detail {

/// Least squares with optional L2 penalty on the coefficients (intercept
/// unpenalized). singular_fallback reports whether the unpenalized system was
/// rank-deficient and a tiny ridge was substituted.
struct LinearFit {
    Eigen::VectorXd coef;
    double intercept = 0.0;
    bool singular_fallback = false;
};
LinearFit fit_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2_penalty);

/// Coordinate descent on 1/(2n)||y - Xw - b||^2 + a*r*||w||_1 + a*(1-r)/2*||w||^2.
/// The per-sweep objective trace is kept so monotone descent is checkable.
struct ElasticNetFit {
    Eigen::VectorXd coef;
    double intercept = 0.0;
    std::vector<double> objectives;  // objective after each sweep
    int sweeps = 0;
};
ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                              double l1_ratio, int max_sweeps, double tol);

/// Max-norm violation of the elastic-net subgradient optimality conditions.
double elastic_net_optimality_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& coef, double intercept,
                                       double alpha, double l1_ratio);

/// Weighted ridge regression with unpenalized intercept; columns that are
/// identically zero get coefficient exactly 0.
struct WeightedRidgeFit {
    Eigen::VectorXd coef;
    double intercept = 0.0;
    double weighted_r2 = 0.0;  // on the fit sample
};
WeightedRidgeFit fit_weighted_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, double penalty);

}  // namespace xai::detail

#endif

#ifndef XAI_DISSONANCE_HPP
#define XAI_DISSONANCE_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "xai/explainers.hpp"

namespace xai {

/// A Pearson correlation that may be undefined (zero-variance input).
/// Undefined values count as 0 in every aggregate, matching the convention
/// used throughout the reports.
struct CorrelationValue {
    bool defined = false;
    double value = 0.0;  // meaningful only when defined

    double effective() const { return defined ? value : 0.0; }

    static CorrelationValue make_defined(double v) { return {true, v}; }
    static CorrelationValue undefined() { return {false, 0.0}; }
};

struct CorrelationReport {
    std::vector<std::string> feature_order;
    std::map<std::string, CorrelationValue> per_feature;
    double average = 0.0;  // mean of effective values over all features
    CorrelationValue correlation_max;
    int undefined_count = 0;
    std::string model_kind;
    std::string source_id;
};

/// Standard Pearson r; undefined when either vector has zero variance or
/// fewer than 2 entries. |r| clamped into [-1, 1].
CorrelationValue pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Correlation of the two explainers' per-instance score series for one feature.
CorrelationValue feature_correlation(const ExplanationTable& a, const ExplanationTable& b,
                                     const std::string& feature);

/// Mean of effective per-feature correlations; undefined features contribute
/// 0 to the numerator and 1 to the denominator.
double average_correlation(const ExplanationTable& a, const ExplanationTable& b);

/// Entry i = |score| of the rank-0 row of instance i.
Eigen::VectorXd max_importance_series(const ExplanationTable& t);

/// Pearson correlation of the two tables' max-importance series.
CorrelationValue correlation_max(const ExplanationTable& a, const ExplanationTable& b);

/// Unbiased sample variance (divisor n-1).
double sample_variance(const Eigen::VectorXd& values);

CorrelationReport compare_explanations(const ExplanationTable& a, const ExplanationTable& b);

/// CSV: feature,correlation,defined rows followed by summary lines.
void export_correlation_report(const CorrelationReport& report, const std::string& path);

}  // namespace xai

#endif

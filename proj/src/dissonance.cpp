#include "xai/dissonance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace xai {

CorrelationValue pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size())
        throw ValidationError("pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()));
    if (x.size() < 2) return CorrelationValue::undefined();
    const double mx = x.mean();
    const double my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx;
    const Eigen::ArrayXd dy = y.array() - my;
    const double sx = dx.square().sum();
    const double sy = dy.square().sum();
    if (sx == 0.0 || sy == 0.0) return CorrelationValue::undefined();
    double r = (dx * dy).sum() / std::sqrt(sx * sy);
    r = std::clamp(r, -1.0, 1.0);  // floating-point overshoot
    return CorrelationValue::make_defined(r);
}

namespace {

void check_comparable(const ExplanationTable& a, const ExplanationTable& b) {
    if (a.n_instances != b.n_instances)
        throw ValidationError("explanation tables cover different instance sets (" +
                              std::to_string(a.n_instances) + " vs " +
                              std::to_string(b.n_instances) + " instances)");
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    if (sorted(a.feature_names) != sorted(b.feature_names))
        throw ValidationError("explanation tables cover different feature sets");
}

Eigen::VectorXd score_series(const ExplanationTable& t, const std::string& feature) {
    Eigen::VectorXd out(t.n_instances);
    int seen = 0;
    for (const auto& row : t.rows) {
        if (row.feature == feature) {
            out(row.instance) = row.score;
            ++seen;
        }
    }
    if (seen != t.n_instances)
        throw ValidationError("feature not present in explanation table: " + feature);
    return out;
}

}  // namespace

CorrelationValue feature_correlation(const ExplanationTable& a, const ExplanationTable& b,
                                     const std::string& feature) {
    check_comparable(a, b);
    return pearson(score_series(a, feature), score_series(b, feature));
}

double average_correlation(const ExplanationTable& a, const ExplanationTable& b) {
    check_comparable(a, b);
    double sum = 0.0;
    for (const auto& feature : a.feature_names)
        sum += feature_correlation(a, b, feature).effective();
    return sum / static_cast<double>(a.feature_names.size());
}

Eigen::VectorXd max_importance_series(const ExplanationTable& t) {
    t.validate();
    Eigen::VectorXd out(t.n_instances);
    for (const auto& row : t.rows)
        if (row.rank == 0) out(row.instance) = std::abs(row.score);
    return out;
}

CorrelationValue correlation_max(const ExplanationTable& a, const ExplanationTable& b) {
    if (a.n_instances != b.n_instances)
        throw ValidationError("correlation_max: instance sets differ");
    return pearson(max_importance_series(a), max_importance_series(b));
}

double sample_variance(const Eigen::VectorXd& values) {
    if (values.size() < 2)
        throw ValidationError("sample_variance requires at least 2 values, got " +
                              std::to_string(values.size()));
    const double mean = values.mean();
    return (values.array() - mean).square().sum() / static_cast<double>(values.size() - 1);
}

CorrelationReport compare_explanations(const ExplanationTable& a, const ExplanationTable& b) {
    check_comparable(a, b);
    CorrelationReport report;
    report.feature_order = a.feature_names;
    report.model_kind = a.model_kind;
    report.source_id = a.source_id;
    double sum = 0.0;
    for (const auto& feature : a.feature_names) {
        const CorrelationValue c = feature_correlation(a, b, feature);
        report.per_feature[feature] = c;
        sum += c.effective();
        if (!c.defined) ++report.undefined_count;
    }
    report.average = sum / static_cast<double>(a.feature_names.size());
    report.correlation_max = correlation_max(a, b);
    return report;
}

void export_correlation_report(const CorrelationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write correlation report: " + path);
    out << "feature,correlation,defined\n";
    for (const auto& feature : report.feature_order) {
        const auto& c = report.per_feature.at(feature);
        out << feature << ',' << format_double(c.effective()) << ','
            << (c.defined ? "true" : "false") << '\n';
    }
    out << "#average," << format_double(report.average) << ",\n";
    out << "#correlation_max," << format_double(report.correlation_max.effective()) << ','
        << (report.correlation_max.defined ? "true" : "false") << '\n';
    out << "#undefined_count," << report.undefined_count << ",\n";
}

}  // namespace xai

#ifndef XAI_TEST_UTIL_HPP
#define XAI_TEST_UTIL_HPP

#include <Eigen/Dense>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xai/dataset.hpp"
#include "xai/explainers.hpp"

namespace test_util {

inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("xai_test_" + tag + "_" + std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline xai::TabularDataset make_regression_dataset(const Eigen::MatrixXd& X,
                                                   const Eigen::VectorXd& y,
                                                   const std::string& id = "synthetic") {
    xai::TabularDataset ds;
    for (Eigen::Index j = 0; j < X.cols(); ++j) ds.feature_names.push_back("f" + std::to_string(j));
    ds.features = X;
    ds.target = y;
    ds.task_kind = xai::TaskKind::regression;
    ds.source_id = id;
    return ds;
}

inline xai::TabularDataset make_classification_dataset(const Eigen::MatrixXd& X,
                                                       const Eigen::VectorXd& y, int n_classes,
                                                       const std::string& id = "synthetic") {
    xai::TabularDataset ds = make_regression_dataset(X, y, id);
    ds.task_kind = xai::TaskKind::classification;
    for (int c = 0; c < n_classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
    return ds;
}

/// Builds a pair of explanation tables (3 instances) whose per-feature score
/// series have exactly the requested Pearson correlations. A non-finite entry
/// requests an undefined correlation (constant series on the second table).
inline std::pair<xai::ExplanationTable, xai::ExplanationTable> tables_with_correlations(
    const std::vector<double>& correlations) {
    const int m = static_cast<int>(correlations.size());
    const Eigen::Vector3d base(-1.0, 0.0, 1.0);        // zero-mean
    const Eigen::Vector3d orth(1.0, -2.0, 1.0);        // orthogonal to base
    const Eigen::Vector3d u = base / base.norm();
    const Eigen::Vector3d v = orth / orth.norm();

    Eigen::MatrixXd a(3, m), b(3, m);
    for (int j = 0; j < m; ++j) {
        a.col(j) = base;
        const double r = correlations[static_cast<std::size_t>(j)];
        if (std::isfinite(r))
            b.col(j) = r * u + std::sqrt(std::max(0.0, 1.0 - r * r)) * v;
        else
            b.col(j).setConstant(0.25);  // undefined: zero variance
    }
    std::vector<std::string> names;
    for (int j = 0; j < m; ++j) names.push_back("f" + std::to_string(j));
    const Eigen::MatrixXd values = Eigen::MatrixXd::Zero(3, m);
    return {xai::make_explanation_table("shap", "synthetic", "test", names, a, values),
            xai::make_explanation_table("lime", "synthetic", "test", names, b, values)};
}

}  // namespace test_util

#endif

#ifndef XAI_REPORTING_HPP
#define XAI_REPORTING_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace xai {

/// Correlation heatmap on a fixed diverging scale (-1 cold, +1 warm).
/// Writes <path>.csv and <path>.svg; bytes are deterministic for identical
/// input.
void emit_heatmap(const std::vector<std::string>& row_labels,
                  const std::vector<std::string>& col_labels, const Eigen::MatrixXd& values,
                  const std::string& path_stem, const std::string& title);

struct ScatterFitResult {
    bool has_fit = false;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Labeled scatter with a dashed least-squares line. When all x coincide the
/// fit is skipped and a warning row lands in the CSV sidecar.
ScatterFitResult emit_scatter_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                  const std::vector<std::string>& point_labels,
                                  const std::string& path_stem, const std::string& title,
                                  const std::string& x_label, const std::string& y_label);

/// Two polylines over categorical x with a legend.
void emit_line_pair(const Eigen::VectorXd& series_a, const std::string& label_a,
                    const Eigen::VectorXd& series_b, const std::string& label_b,
                    const std::vector<std::string>& x_labels, const std::string& path_stem,
                    const std::string& title);

}  // namespace xai

#endif

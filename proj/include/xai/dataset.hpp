#ifndef XAI_DATASET_HPP
#define XAI_DATASET_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xai/common.hpp"

namespace xai {

enum class TaskKind { regression, classification };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

/// Rectangular numeric feature matrix plus target vector; the unit every
/// pipeline stage consumes. Immutable by convention after construction.
struct TabularDataset {
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;  // rows = instances, cols = features
    Eigen::VectorXd target;    // real for regression, class index for classification
    TaskKind task_kind = TaskKind::regression;
    std::string source_id;
    // classification only: label text in first-appearance order; target holds indices
    std::vector<std::string> class_names;

    Eigen::Index n_rows() const { return features.rows(); }
    Eigen::Index n_features() const { return features.cols(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }

    /// Throws ValidationError if the rectangularity/finiteness invariants fail.
    void validate() const;
};

enum class ScalerKind { standard, min_max };

ScalerKind scaler_kind_from_string(const std::string& s);

/// Per-feature affine transform fitted on training data only.
/// standard: (x - mean) / stddev, with stddev <- 1 for constant columns.
/// min_max: (x - min) / (max - min), constant columns map to 0.
struct Scaler {
    ScalerKind kind = ScalerKind::standard;
    Eigen::VectorXd shift;  // mean or min
    Eigen::VectorXd scale;  // stddev or (max - min); never zero

    static Scaler fit(ScalerKind kind, const Eigen::MatrixXd& train_features);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
};

TabularDataset load_csv(const std::string& path, const std::string& target_column,
                        const std::vector<std::string>& drop_columns, TaskKind task_kind);

/// Re-emits a dataset as CSV with identical header ordering; load_csv on the
/// result reproduces the dataset exactly.
void save_csv(const TabularDataset& dataset, const std::string& path);

/// Seeded shuffle split; |test| = round(test_fraction * N). For classification
/// the draw is retried until every class keeps a training representative.
std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& dataset,
                                                           double test_fraction,
                                                           std::uint64_t seed);

struct ScaledSplit {
    TabularDataset train;
    TabularDataset test;
    Scaler scaler;
};

/// Fits the scaler on train only and applies it to both partitions.
/// Targets are untouched.
ScaledSplit scale(const TabularDataset& train, const TabularDataset& test, ScalerKind kind);

}  // namespace xai

#endif

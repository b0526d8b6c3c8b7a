#ifndef XAI_MODEL_IMPL_HPP
#define XAI_MODEL_IMPL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "xai/models.hpp"

namespace xai::detail {

class ModelImpl {
public:
    virtual ~ModelImpl() = default;
    virtual ModelKind kind() const = 0;

    /// Regression: fitted value. Classification: predicted class index
    /// (argmax of predict_proba, ties toward the lower class label).
    virtual Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const = 0;
    virtual Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const;
    virtual int n_classes() const { return 0; }

    int n_features = 0;
};

/// Argmax per row with ties resolved toward the lower index.
Eigen::VectorXd argmax_rows(const Eigen::MatrixXd& proba);

// ---- shared CART machinery ------------------------------------------------

struct TreeNode {
    int feature = -1;         // -1 marks a leaf
    double threshold = 0.0;   // goes left when x <= threshold
    int left = -1;
    int right = -1;
    Eigen::VectorXd value;    // size 1 (regression mean) or K (class fractions)
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    int leaf_index(const Eigen::RowVectorXd& row) const;
    const Eigen::VectorXd& leaf_value(const Eigen::RowVectorXd& row) const {
        return nodes[static_cast<std::size_t>(leaf_index(row))].value;
    }
};

struct TreeGrowOptions {
    bool classification = false;
    int n_classes = 0;
    int max_depth = 10;
    int min_leaf = 1;
    int features_per_split = 0;  // <= 0 means all features
    std::mt19937_64* rng = nullptr;  // required when features_per_split > 0
};

/// CART with Gini (classification) or variance (regression) criterion.
/// Split ties resolve toward the lower feature index, then lower threshold.
/// Returns the tree plus the leaf node index of every training sample.
struct GrownTree {
    Tree tree;
    std::vector<int> leaf_of_sample;  // aligned with sample_indices
};
GrownTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const std::vector<int>& sample_indices, const TreeGrowOptions& opts);

}  // namespace xai::detail

#endif

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "model_impl.hpp"

namespace xai::detail {

Eigen::VectorXd argmax_rows(const Eigen::MatrixXd& proba) {
    Eigen::VectorXd out(proba.rows());
    for (Eigen::Index i = 0; i < proba.rows(); ++i) {
        int best = 0;
        for (Eigen::Index k = 1; k < proba.cols(); ++k)
            if (proba(i, k) > proba(i, best)) best = static_cast<int>(k);
        out(i) = best;
    }
    return out;
}

Eigen::MatrixXd ModelImpl::predict_proba(const Eigen::MatrixXd&) const {
    throw ValidationError("predict_proba is only available for classifiers (" +
                          to_string(kind()) + ")");
}

int Tree::leaf_index(const Eigen::RowVectorXd& row) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const auto& nd = nodes[static_cast<std::size_t>(idx)];
        idx = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return idx;
}

namespace {

struct SplitSearch {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
};

Eigen::VectorXd leaf_value_of(const Eigen::VectorXd& y, const std::vector<int>& idx,
                              const TreeGrowOptions& opts) {
    if (opts.classification) {
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(opts.n_classes);
        for (int i : idx) counts(static_cast<int>(y(i))) += 1.0;
        return counts / static_cast<double>(idx.size());
    }
    double sum = 0.0;
    for (int i : idx) sum += y(i);
    Eigen::VectorXd v(1);
    v(0) = sum / static_cast<double>(idx.size());
    return v;
}

// Weighted child impurity: Gini for classification, SSE for regression.
// Computed with a single ascending scan over the sorted node samples.
SplitSearch best_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const std::vector<int>& idx, const std::vector<int>& features,
                       const TreeGrowOptions& opts) {
    SplitSearch best;
    const int n = static_cast<int>(idx.size());
    std::vector<int> order(idx);
    for (int f : features) {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return X(a, f) < X(b, f); });
        if (X(order.front(), f) == X(order.back(), f)) continue;  // constant in node

        if (opts.classification) {
            Eigen::VectorXd left = Eigen::VectorXd::Zero(opts.n_classes);
            Eigen::VectorXd right = Eigen::VectorXd::Zero(opts.n_classes);
            for (int i : order) right(static_cast<int>(y(i))) += 1.0;
            for (int pos = 0; pos < n - 1; ++pos) {
                const int cls = static_cast<int>(y(order[static_cast<std::size_t>(pos)]));
                left(cls) += 1.0;
                right(cls) -= 1.0;
                const double xv = X(order[static_cast<std::size_t>(pos)], f);
                const double xn = X(order[static_cast<std::size_t>(pos) + 1], f);
                if (xv == xn) continue;
                const int nl = pos + 1, nr = n - nl;
                if (nl < opts.min_leaf || nr < opts.min_leaf) continue;
                const double gl = 1.0 - (left / nl).squaredNorm();
                const double gr = 1.0 - (right / nr).squaredNorm();
                const double imp = (nl * gl + nr * gr) / n;
                if (imp < best.impurity) {
                    best = {true, f, 0.5 * (xv + xn), imp};
                }
            }
        } else {
            double sum_l = 0.0, sq_l = 0.0;
            double sum_r = 0.0, sq_r = 0.0;
            for (int i : order) {
                sum_r += y(i);
                sq_r += y(i) * y(i);
            }
            for (int pos = 0; pos < n - 1; ++pos) {
                const double yv = y(order[static_cast<std::size_t>(pos)]);
                sum_l += yv;
                sq_l += yv * yv;
                sum_r -= yv;
                sq_r -= yv * yv;
                const double xv = X(order[static_cast<std::size_t>(pos)], f);
                const double xn = X(order[static_cast<std::size_t>(pos) + 1], f);
                if (xv == xn) continue;
                const int nl = pos + 1, nr = n - nl;
                if (nl < opts.min_leaf || nr < opts.min_leaf) continue;
                const double imp = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
                if (imp < best.impurity) {
                    best = {true, f, 0.5 * (xv + xn), imp};
                }
            }
        }
    }
    return best;
}

bool node_is_pure(const Eigen::VectorXd& y, const std::vector<int>& idx) {
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (y(idx[i]) != y(idx[0])) return false;
    return true;
}

struct Grower {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const TreeGrowOptions& opts;
    Tree tree;
    std::vector<std::pair<int, int>> sample_leaf;  // (sample slot, leaf node)

    int build(std::vector<int> idx, const std::vector<int>& slots, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().value = leaf_value_of(y, idx, opts);

        bool make_leaf = depth >= opts.max_depth ||
                         static_cast<int>(idx.size()) < 2 * opts.min_leaf ||
                         node_is_pure(y, idx);
        SplitSearch split;
        if (!make_leaf) {
            std::vector<int> features;
            const int m = static_cast<int>(X.cols());
            if (opts.features_per_split > 0 && opts.features_per_split < m) {
                std::vector<int> all(static_cast<std::size_t>(m));
                std::iota(all.begin(), all.end(), 0);
                for (int k = 0; k < opts.features_per_split; ++k) {
                    std::uniform_int_distribution<int> pick(k, m - 1);
                    std::swap(all[static_cast<std::size_t>(k)],
                              all[static_cast<std::size_t>(pick(*opts.rng))]);
                }
                features.assign(all.begin(), all.begin() + opts.features_per_split);
                std::sort(features.begin(), features.end());
            } else {
                features.resize(static_cast<std::size_t>(m));
                std::iota(features.begin(), features.end(), 0);
            }
            split = best_split(X, y, idx, features, opts);
            make_leaf = !split.found;
        }

        if (make_leaf) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                sample_leaf.emplace_back(slots[i], node_id);
            return node_id;
        }

        std::vector<int> li, ri, ls, rs;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (X(idx[i], split.feature) <= split.threshold) {
                li.push_back(idx[i]);
                ls.push_back(slots[i]);
            } else {
                ri.push_back(idx[i]);
                rs.push_back(slots[i]);
            }
        }
        tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
        const int left_id = build(std::move(li), ls, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = left_id;
        const int right_id = build(std::move(ri), rs, depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].right = right_id;
        return node_id;
    }
};

}  // namespace

GrownTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const std::vector<int>& sample_indices, const TreeGrowOptions& opts) {
    Grower g{X, y, opts, {}, {}};
    std::vector<int> slots(sample_indices.size());
    std::iota(slots.begin(), slots.end(), 0);
    g.build(sample_indices, slots, 0);

    GrownTree out;
    out.tree = std::move(g.tree);
    out.leaf_of_sample.resize(sample_indices.size());
    for (const auto& [slot, leaf] : g.sample_leaf)
        out.leaf_of_sample[static_cast<std::size_t>(slot)] = leaf;
    return out;
}

}  // namespace xai::detail

#include <cmath>
#include <numeric>

#include "model_impl.hpp"

namespace xai::detail {

namespace {

class DecisionTreeModel final : public ModelImpl {
public:
    DecisionTreeModel(Tree tree, TaskKind task, int n_classes)
        : tree_(std::move(tree)), task_(task), n_classes_(n_classes) {}

    ModelKind kind() const override { return ModelKind::decision_tree; }
    int n_classes() const override { return n_classes_; }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        if (task_ != TaskKind::classification) return ModelImpl::predict_proba(X);
        Eigen::MatrixXd out(X.rows(), n_classes_);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out.row(i) = tree_.leaf_value(X.row(i)).transpose();
        return out;
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        if (task_ == TaskKind::classification) return argmax_rows(predict_proba(X));
        Eigen::VectorXd out(X.rows());
        for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = tree_.leaf_value(X.row(i))(0);
        return out;
    }

private:
    Tree tree_;
    TaskKind task_;
    int n_classes_;
};

class RandomForestModel final : public ModelImpl {
public:
    RandomForestModel(std::vector<Tree> trees, int n_classes)
        : trees_(std::move(trees)), n_classes_(n_classes) {}

    ModelKind kind() const override { return ModelKind::random_forest; }
    int n_classes() const override { return n_classes_; }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), n_classes_);
        for (const auto& tree : trees_)
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                out.row(i) += tree.leaf_value(X.row(i)).transpose();
        return out / static_cast<double>(trees_.size());
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    std::vector<Tree> trees_;
    int n_classes_;
};

class BoostedRegModel final : public ModelImpl {
public:
    BoostedRegModel(double base, double learning_rate, std::vector<Tree> trees)
        : base_(base), learning_rate_(learning_rate), trees_(std::move(trees)) {}

    ModelKind kind() const override { return ModelKind::gradient_boosting_reg; }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), base_);
        for (const auto& tree : trees_)
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                out(i) += learning_rate_ * tree.leaf_value(X.row(i))(0);
        return out;
    }

private:
    double base_;
    double learning_rate_;
    std::vector<Tree> trees_;
};

class BoostedClfModel final : public ModelImpl {
public:
    BoostedClfModel(Eigen::RowVectorXd base_logits, double learning_rate,
                    std::vector<std::vector<Tree>> trees)
        : base_logits_(std::move(base_logits)), learning_rate_(learning_rate),
          trees_(std::move(trees)) {}

    ModelKind kind() const override { return ModelKind::gradient_boosting_clf; }
    int n_classes() const override { return static_cast<int>(base_logits_.size()); }

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& X) const override {
        const int k = n_classes();
        Eigen::MatrixXd logits = base_logits_.replicate(X.rows(), 1);
        for (const auto& round : trees_)
            for (int c = 0; c < k; ++c)
                for (Eigen::Index i = 0; i < X.rows(); ++i)
                    logits(i, c) += learning_rate_ * round[static_cast<std::size_t>(c)]
                                        .leaf_value(X.row(i))(0);
        Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
        logits.colwise() -= row_max;
        Eigen::MatrixXd p = logits.array().exp();
        return p.array().colwise() / p.rowwise().sum().array();
    }
    Eigen::VectorXd predict_values(const Eigen::MatrixXd& X) const override {
        return argmax_rows(predict_proba(X));
    }

private:
    Eigen::RowVectorXd base_logits_;
    double learning_rate_;
    std::vector<std::vector<Tree>> trees_;
};

std::vector<int> all_rows(Eigen::Index n) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

}  // namespace

std::unique_ptr<ModelImpl> fit_decision_tree(const Hyperparams& params, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y, TaskKind task,
                                             int n_classes) {
    TreeGrowOptions opts;
    opts.classification = task == TaskKind::classification;
    opts.n_classes = n_classes;
    opts.max_depth = static_cast<int>(params.get("max_depth"));
    opts.min_leaf = static_cast<int>(params.get("min_leaf"));
    return std::make_unique<DecisionTreeModel>(grow_tree(X, y, all_rows(X.rows()), opts).tree,
                                               task, n_classes);
}

std::unique_ptr<ModelImpl> fit_random_forest(const Hyperparams& params, const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y, int n_classes,
                                             std::uint64_t seed) {
    const int n_trees = static_cast<int>(params.get("n_trees"));
    const bool bootstrap = params.get("bootstrap") != 0.0;
    const double frac = params.get("feature_fraction");  // 0 means sqrt(M)
    const int m = static_cast<int>(X.cols());
    int per_split;
    if (frac == 0.0)
        per_split = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)))));
    else
        per_split = std::max(1, static_cast<int>(std::lround(frac * m)));

    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(sub_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<int> idx;
        if (bootstrap) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(X.rows()) - 1);
            idx.resize(static_cast<std::size_t>(X.rows()));
            for (auto& v : idx) v = pick(rng);
        } else {
            idx = all_rows(X.rows());
        }
        TreeGrowOptions opts;
        opts.classification = true;
        opts.n_classes = n_classes;
        opts.max_depth = static_cast<int>(params.get("max_depth"));
        opts.min_leaf = static_cast<int>(params.get("min_leaf"));
        opts.features_per_split = per_split >= m ? 0 : per_split;
        opts.rng = &rng;
        trees.push_back(grow_tree(X, y, idx, opts).tree);
    }
    return std::make_unique<RandomForestModel>(std::move(trees), n_classes);
}

std::unique_ptr<ModelImpl> fit_boosted_reg(const Hyperparams& params, const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y) {
    const int n_trees = static_cast<int>(params.get("n_trees"));
    const double lr = params.get("learning_rate");
    TreeGrowOptions opts;
    opts.classification = false;
    opts.max_depth = static_cast<int>(params.get("max_depth"));
    opts.min_leaf = static_cast<int>(params.get("min_leaf"));

    const double base = y.mean();
    Eigen::VectorXd current = Eigen::VectorXd::Constant(y.size(), base);
    const auto idx = all_rows(X.rows());
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        const Eigen::VectorXd resid = y - current;
        GrownTree grown = grow_tree(X, resid, idx, opts);
        for (std::size_t i = 0; i < idx.size(); ++i)
            current(static_cast<Eigen::Index>(i)) +=
                lr * grown.tree.nodes[static_cast<std::size_t>(grown.leaf_of_sample[i])].value(0);
        trees.push_back(std::move(grown.tree));
    }
    return std::make_unique<BoostedRegModel>(base, lr, std::move(trees));
}

std::unique_ptr<ModelImpl> fit_boosted_clf(const Hyperparams& params, const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y, int n_classes) {
    const int n_trees = static_cast<int>(params.get("n_trees"));
    const double lr = params.get("learning_rate");
    const Eigen::Index n = X.rows();
    TreeGrowOptions opts;
    opts.classification = false;
    opts.max_depth = static_cast<int>(params.get("max_depth"));
    opts.min_leaf = static_cast<int>(params.get("min_leaf"));

    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n_classes);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        Y(i, static_cast<int>(y(i))) = 1.0;
        counts(static_cast<int>(y(i))) += 1.0;
    }
    Eigen::RowVectorXd base =
        (counts / static_cast<double>(n)).array().max(1e-12).log().transpose();

    Eigen::MatrixXd logits = base.replicate(n, 1);
    const auto idx = all_rows(n);
    const double kfac = static_cast<double>(n_classes - 1) / static_cast<double>(n_classes);
    std::vector<std::vector<Tree>> rounds;
    rounds.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        Eigen::MatrixXd shifted = logits.colwise() - logits.rowwise().maxCoeff();
        Eigen::MatrixXd P = shifted.array().exp();
        P.array().colwise() /= P.rowwise().sum().array();

        std::vector<Tree> round;
        round.reserve(static_cast<std::size_t>(n_classes));
        for (int c = 0; c < n_classes; ++c) {
            const Eigen::VectorXd resid = Y.col(c) - P.col(c);
            GrownTree grown = grow_tree(X, resid, idx, opts);
            // Newton leaf values for the multinomial deviance loss
            std::vector<double> num(grown.tree.nodes.size(), 0.0);
            std::vector<double> den(grown.tree.nodes.size(), 0.0);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto leaf = static_cast<std::size_t>(grown.leaf_of_sample[i]);
                const double r = resid(static_cast<Eigen::Index>(i));
                num[leaf] += r;
                den[leaf] += std::abs(r) * (1.0 - std::abs(r));
            }
            for (std::size_t nd = 0; nd < grown.tree.nodes.size(); ++nd)
                if (grown.tree.nodes[nd].feature < 0)
                    grown.tree.nodes[nd].value(0) =
                        den[nd] > 1e-12 ? kfac * num[nd] / den[nd] : 0.0;
            for (std::size_t i = 0; i < idx.size(); ++i)
                logits(static_cast<Eigen::Index>(i), c) +=
                    lr * grown.tree.nodes[static_cast<std::size_t>(grown.leaf_of_sample[i])]
                             .value(0);
            round.push_back(std::move(grown.tree));
        }
        rounds.push_back(std::move(round));
    }
    return std::make_unique<BoostedClfModel>(base, lr, std::move(rounds));
}

}  // namespace xai::detail

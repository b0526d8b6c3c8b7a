#include "xai/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "xai/detail/solvers.hpp"

namespace xai {

ExplainerConfig ExplainerConfig::shap_defaults(std::uint64_t seed) {
    ExplainerConfig c;
    c.explainer_id = "shap";
    c.n_samples = 2048;
    c.background_size = 100;
    c.seed = seed;
    return c;
}

ExplainerConfig ExplainerConfig::lime_defaults(std::uint64_t seed) {
    ExplainerConfig c;
    c.explainer_id = "lime";
    c.n_samples = 1000;
    c.kernel_width = 0.0;  // resolved to 0.75 * sqrt(M) at explain time
    c.ridge_penalty = 1.0;
    c.seed = seed;
    return c;
}

Eigen::MatrixXd ExplanationTable::score_matrix() const {
    Eigen::MatrixXd out(n_instances, static_cast<Eigen::Index>(feature_names.size()));
    for (const auto& row : rows) {
        const auto it = std::find(feature_names.begin(), feature_names.end(), row.feature);
        out(row.instance, static_cast<Eigen::Index>(it - feature_names.begin())) = row.score;
    }
    return out;
}

void ExplanationTable::validate() const {
    const int m = static_cast<int>(feature_names.size());
    if (static_cast<int>(rows.size()) != n_instances * m)
        throw ValidationError("explanation table: row count " + std::to_string(rows.size()) +
                              " != instances*features");
    std::vector<std::vector<int>> ranks(static_cast<std::size_t>(n_instances));
    for (const auto& row : rows) {
        if (row.instance < 0 || row.instance >= n_instances)
            throw ValidationError("explanation table: instance index out of range");
        ranks[static_cast<std::size_t>(row.instance)].push_back(row.rank);
    }
    for (auto& r : ranks) {
        std::sort(r.begin(), r.end());
        for (int i = 0; i < m; ++i)
            if (r[static_cast<std::size_t>(i)] != i)
                throw ValidationError("explanation table: ranks are not a permutation of 0..M-1");
    }
}

ExplanationTable make_explanation_table(const std::string& explainer_id,
                                        const std::string& source_id,
                                        const std::string& model_kind,
                                        const std::vector<std::string>& feature_names,
                                        const Eigen::MatrixXd& scores,
                                        const Eigen::MatrixXd& instance_values) {
    const int n = static_cast<int>(scores.rows());
    const int m = static_cast<int>(scores.cols());
    ExplanationTable t;
    t.explainer_id = explainer_id;
    t.source_id = source_id;
    t.model_kind = model_kind;
    t.feature_names = feature_names;
    t.n_instances = n;
    t.rows.reserve(static_cast<std::size_t>(n * m));
    for (int i = 0; i < n; ++i) {
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        // descending |score|; feature index breaks ties
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(scores(i, a)) > std::abs(scores(i, b));
        });
        for (int r = 0; r < m; ++r) {
            const int j = order[static_cast<std::size_t>(r)];
            t.rows.push_back({i, feature_names[static_cast<std::size_t>(j)],
                              instance_values(i, j), scores(i, j), r});
        }
    }
    return t;
}

namespace {

// Scalar model output: regression value, or the probability of the class the
// model predicts for the anchor instance.
struct ScalarOutput {
    const TrainedModel& model;
    int fixed_class = -1;

    static ScalarOutput at(const TrainedModel& model, const Eigen::RowVectorXd& anchor) {
        ScalarOutput s{model, -1};
        if (model.task_kind() == TaskKind::classification)
            s.fixed_class = static_cast<int>(model.predict(anchor)(0));
        return s;
    }

    Eigen::VectorXd operator()(const Eigen::MatrixXd& X) const {
        if (fixed_class < 0) return model.predict(X);
        return model.predict_proba(X).col(fixed_class);
    }
};

double shapley_kernel_weight(int m, int s) {
    double comb = 1.0;
    for (int i = 1; i <= s; ++i) comb *= static_cast<double>(m - i + 1) / i;
    return static_cast<double>(m - 1) / (comb * s * (m - s));
}

Eigen::RowVectorXd background_means(const TabularDataset& background) {
    return background.features.colwise().mean();
}

// Solves the constrained weighted regression: the efficiency constraint
// sum(phi) = delta is eliminated by substituting the last coefficient.
Eigen::VectorXd solve_shap_wls(const Eigen::MatrixXd& coalitions, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& weights, double base, double delta,
                               bool& singular) {
    const Eigen::Index m = coalitions.cols();
    Eigen::MatrixXd A(coalitions.rows(), m - 1);
    for (Eigen::Index j = 0; j + 1 < m; ++j)
        A.col(j) = coalitions.col(j) - coalitions.col(m - 1);
    const Eigen::VectorXd b =
        v.array() - base - coalitions.col(m - 1).array() * delta;

    const Eigen::MatrixXd Aw = weights.asDiagonal() * A;
    const Eigen::MatrixXd gram = A.transpose() * Aw;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    lu.setThreshold(1e-10);
    singular = lu.rank() < m - 1;
    Eigen::VectorXd psi = gram.ldlt().solve(Aw.transpose() * b);

    Eigen::VectorXd phi(m);
    phi.head(m - 1) = psi;
    phi(m - 1) = delta - psi.sum();
    return phi;
}

Eigen::VectorXd shap_single_instance(const ScalarOutput& out, const Eigen::RowVectorXd& x,
                                     const Eigen::RowVectorXd& bg_mean, int n_samples,
                                     std::uint64_t seed) {
    const int m = static_cast<int>(x.size());
    const double base = out(bg_mean)(0);
    const double fx = out(x)(0);
    const double delta = fx - base;

    if (m == 1) {
        Eigen::VectorXd phi(1);
        phi(0) = delta;
        return phi;
    }

    const bool full = m < 62 && (1ULL << m) <= static_cast<std::uint64_t>(n_samples);
    for (int attempt = 0; attempt < 5; ++attempt) {
        Eigen::MatrixXd coalitions;  // rows of 0/1, interior coalitions only
        Eigen::VectorXd weights;
        if (full) {
            const int n_coal = (1 << m) - 2;
            coalitions.resize(n_coal, m);
            weights.resize(n_coal);
            int r = 0;
            for (std::uint64_t mask = 1; mask + 1 < (1ULL << m); ++mask, ++r) {
                int size = 0;
                for (int j = 0; j < m; ++j) {
                    const bool in = (mask >> j) & 1ULL;
                    coalitions(r, j) = in ? 1.0 : 0.0;
                    size += in;
                }
                weights(r) = shapley_kernel_weight(m, size);
            }
        } else {
            // sizes drawn proportionally to the Shapley kernel, so sampled
            // coalitions enter the regression with uniform weight
            std::vector<double> size_probs(static_cast<std::size_t>(m - 1));
            for (int s = 1; s < m; ++s)
                size_probs[static_cast<std::size_t>(s - 1)] =
                    static_cast<double>(m - 1) / (s * (m - s));
            std::discrete_distribution<int> size_dist(size_probs.begin(), size_probs.end());
            std::mt19937_64 rng(sub_seed(seed, static_cast<std::uint64_t>(attempt)));

            const int n_coal = n_samples - 2;
            coalitions = Eigen::MatrixXd::Zero(n_coal, m);
            weights = Eigen::VectorXd::Ones(n_coal);
            std::vector<int> pool(static_cast<std::size_t>(m));
            for (int r = 0; r < n_coal; ++r) {
                const int size = size_dist(rng) + 1;
                std::iota(pool.begin(), pool.end(), 0);
                for (int k = 0; k < size; ++k) {
                    std::uniform_int_distribution<int> pick(k, m - 1);
                    std::swap(pool[static_cast<std::size_t>(k)],
                              pool[static_cast<std::size_t>(pick(rng))]);
                    coalitions(r, pool[static_cast<std::size_t>(k)]) = 1.0;
                }
            }
        }

        // one batched model call for every coalition
        Eigen::MatrixXd imputed = bg_mean.replicate(coalitions.rows(), 1);
        for (Eigen::Index r = 0; r < coalitions.rows(); ++r)
            for (int j = 0; j < m; ++j)
                if (coalitions(r, j) != 0.0) imputed(r, j) = x(j);
        const Eigen::VectorXd v = out(imputed);

        bool singular = false;
        Eigen::VectorXd phi = solve_shap_wls(coalitions, v, weights, base, delta, singular);
        if (!singular) return phi;
        if (full) return phi;  // full enumeration cannot improve by redrawing
    }
    throw Error("kernel SHAP: degenerate coalition sample after 5 attempts");
}

}  // namespace

ExplanationTable explain_kernel_shap(const TrainedModel& model, const TabularDataset& background,
                                     const Eigen::MatrixXd& instances,
                                     const ExplainerConfig& config) {
    if (background.n_rows() == 0) throw ValidationError("SHAP background is empty");
    if (instances.cols() != background.n_features())
        throw ValidationError("SHAP: instance feature count does not match background");
    const int m = static_cast<int>(instances.cols());
    if (config.n_samples < m + 2)
        throw ValidationError("SHAP n_samples must be at least M+2");

    // subsample the background with the config seed when it is large
    Eigen::MatrixXd bg = background.features;
    if (background.n_rows() > config.background_size) {
        std::vector<int> order(static_cast<std::size_t>(background.n_rows()));
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(sub_seed(config.seed, 0x6261636bULL));
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(static_cast<std::size_t>(config.background_size));
        std::sort(order.begin(), order.end());
        bg.resize(config.background_size, instances.cols());
        for (std::size_t i = 0; i < order.size(); ++i)
            bg.row(static_cast<Eigen::Index>(i)) = background.features.row(order[i]);
    }
    const Eigen::RowVectorXd bg_mean = bg.colwise().mean();

    Eigen::MatrixXd scores(instances.rows(), m);
    for (Eigen::Index i = 0; i < instances.rows(); ++i) {
        const Eigen::RowVectorXd x = instances.row(i);
        const ScalarOutput out = ScalarOutput::at(model, x);
        scores.row(i) = shap_single_instance(out, x, bg_mean, config.n_samples,
                                             sub_seed(config.seed, static_cast<std::uint64_t>(i)))
                            .transpose();
    }
    return make_explanation_table("shap", background.source_id, to_string(model.kind()),
                                  background.feature_names, scores, instances);
}

Eigen::VectorXd shapley_exact(const TrainedModel& model, const TabularDataset& background,
                              const Eigen::VectorXd& instance) {
    const int m = static_cast<int>(instance.size());
    if (m > 20) throw ValidationError("shapley_exact: M > 20 is infeasible");
    const Eigen::RowVectorXd bg_mean = background_means(background);
    const ScalarOutput out = ScalarOutput::at(model, instance.transpose());

    // v(S) for every coalition, batched
    const std::uint64_t n_coal = 1ULL << m;
    Eigen::MatrixXd imputed = bg_mean.replicate(static_cast<Eigen::Index>(n_coal), 1);
    for (std::uint64_t mask = 0; mask < n_coal; ++mask)
        for (int j = 0; j < m; ++j)
            if ((mask >> j) & 1ULL) imputed(static_cast<Eigen::Index>(mask), j) = instance(j);
    const Eigen::VectorXd v = out(imputed);

    std::vector<double> fact(static_cast<std::size_t>(m) + 1, 1.0);
    for (int i = 1; i <= m; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < m; ++j) {
        for (std::uint64_t mask = 0; mask < n_coal; ++mask) {
            if ((mask >> j) & 1ULL) continue;
            const int s = static_cast<int>(__builtin_popcountll(mask));
            const double w = fact[static_cast<std::size_t>(s)] *
                             fact[static_cast<std::size_t>(m - s - 1)] /
                             fact[static_cast<std::size_t>(m)];
            phi(j) += w * (v(static_cast<Eigen::Index>(mask | (1ULL << j))) -
                           v(static_cast<Eigen::Index>(mask)));
        }
    }
    return phi;
}

ExplanationTable explain_lime(const TrainedModel& model, const TabularDataset& train_reference,
                              const Eigen::MatrixXd& instances, const ExplainerConfig& config) {
    if (train_reference.n_rows() == 0) throw ValidationError("LIME reference dataset is empty");
    const int m = static_cast<int>(instances.cols());
    if (train_reference.n_features() != m)
        throw ValidationError("LIME: instance feature count does not match reference");

    Eigen::VectorXd sigma(m);
    for (int j = 0; j < m; ++j) {
        const auto col = train_reference.features.col(j);
        sigma(j) = std::sqrt((col.array() - col.mean()).square().sum() /
                             static_cast<double>(col.size()));
    }
    if ((sigma.array() == 0.0).all())
        throw ValidationError("LIME: every feature of " + train_reference.source_id +
                              " has zero stddev; nothing to perturb");

    const double kw = config.kernel_width > 0.0 ? config.kernel_width
                                                : 0.75 * std::sqrt(static_cast<double>(m));
    const int n_pert = config.n_samples;

    Eigen::MatrixXd scores(instances.rows(), m);
    std::vector<double> r2(static_cast<std::size_t>(instances.rows()));
    for (Eigen::Index i = 0; i < instances.rows(); ++i) {
        const Eigen::RowVectorXd x = instances.row(i);
        const ScalarOutput out = ScalarOutput::at(model, x);
        std::mt19937_64 rng(sub_seed(config.seed, static_cast<std::uint64_t>(i)));
        std::normal_distribution<double> gauss(0.0, 1.0);

        // Z holds standardized offsets; row 0 is the instance itself.
        Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n_pert, m);
        for (int r = 1; r < n_pert; ++r)
            for (int j = 0; j < m; ++j)
                if (sigma(j) > 0.0) Z(r, j) = gauss(rng);

        Eigen::MatrixXd perturbed = x.replicate(n_pert, 1);
        for (int r = 0; r < n_pert; ++r)
            for (int j = 0; j < m; ++j) perturbed(r, j) += Z(r, j) * sigma(j);

        const Eigen::VectorXd y = out(perturbed);
        const Eigen::VectorXd weights =
            (-Z.rowwise().squaredNorm() / (kw * kw)).array().exp();

        const detail::WeightedRidgeFit fit =
            detail::fit_weighted_ridge(Z, y, weights, config.ridge_penalty);
        scores.row(i) = fit.coef.transpose();  // zero-stddev features stay 0
        r2[static_cast<std::size_t>(i)] = fit.weighted_r2;
    }
    ExplanationTable t = make_explanation_table("lime", train_reference.source_id,
                                                to_string(model.kind()),
                                                train_reference.feature_names, scores, instances);
    t.surrogate_r2 = std::move(r2);
    return t;
}

void export_explanations(const ExplanationTable& table, const std::string& path) {
    table.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write explanation file: " + path);
    out << "explainer,instance,rank,feature,value,score\n";
    for (const auto& row : table.rows)
        out << table.explainer_id << ',' << row.instance << ',' << row.rank << ',' << row.feature
            << ',' << format_double(row.value) << ',' << format_double(row.score) << '\n';
}

ExplanationTable load_explanations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open explanation file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "explainer,instance,rank,feature,value,score")
        throw ValidationError("unrecognized explanation file header in " + path);

    ExplanationTable t;
    int max_instance = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        ExplanationRow row;
        std::string cell;
        std::getline(ss, cell, ',');
        if (t.explainer_id.empty()) t.explainer_id = cell;
        std::getline(ss, cell, ',');
        row.instance = std::stoi(cell);
        std::getline(ss, cell, ',');
        row.rank = std::stoi(cell);
        std::getline(ss, row.feature, ',');
        std::getline(ss, cell, ',');
        row.value = std::stod(cell);
        std::getline(ss, cell, ',');
        row.score = std::stod(cell);
        max_instance = std::max(max_instance, row.instance);
        if (std::find(t.feature_names.begin(), t.feature_names.end(), row.feature) ==
            t.feature_names.end())
            t.feature_names.push_back(row.feature);
        t.rows.push_back(std::move(row));
    }
    t.n_instances = max_instance + 1;
    std::sort(t.rows.begin(), t.rows.end(), [](const ExplanationRow& a, const ExplanationRow& b) {
        return std::tie(a.instance, a.rank) < std::tie(b.instance, b.rank);
    });
    t.validate();
    return t;
}

}  // namespace xai

#include "xai/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace xai {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string to_string(TaskKind kind) {
    return kind == TaskKind::regression ? "regression" : "classification";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "regression") return TaskKind::regression;
    if (s == "classification") return TaskKind::classification;
    throw ValidationError("unknown task kind: " + s);
}

ScalerKind scaler_kind_from_string(const std::string& s) {
    if (s == "standard") return ScalerKind::standard;
    if (s == "min_max") return ScalerKind::min_max;
    throw ValidationError("unknown scaler kind: " + s);
}

void TabularDataset::validate() const {
    if (features.rows() != target.size())
        throw ValidationError("dataset " + source_id + ": row count " +
                              std::to_string(features.rows()) + " != target length " +
                              std::to_string(target.size()));
    if (features.cols() != static_cast<Eigen::Index>(feature_names.size()))
        throw ValidationError("dataset " + source_id + ": column count mismatch");
    if (!features.allFinite() || !target.allFinite())
        throw ValidationError("dataset " + source_id + ": non-finite values");
    for (const auto& name : feature_names)
        if (std::count(feature_names.begin(), feature_names.end(), name) > 1)
            throw ValidationError("dataset " + source_id + ": duplicate feature name " + name);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace

TabularDataset load_csv(const std::string& path, const std::string& target_column,
                        const std::vector<std::string>& drop_columns, TaskKind task_kind) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV file: " + path);
    const auto header = split_line(strip_cr(line));

    auto col_index = [&](const std::string& name) -> int {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };

    const int target_idx = col_index(target_column);
    if (target_idx < 0)
        throw ValidationError("target column not found: " + target_column + " in " + path);
    std::set<int> dropped;
    for (const auto& d : drop_columns) {
        const int idx = col_index(d);
        if (idx < 0) throw ValidationError("drop column not found: " + d + " in " + path);
        dropped.insert(idx);
    }
    if (dropped.count(target_idx))
        throw ValidationError("target column also listed in drop columns: " + target_column);

    std::vector<int> feature_cols;
    std::vector<std::string> feature_names;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (i == target_idx || dropped.count(i)) continue;
        feature_cols.push_back(i);
        feature_names.push_back(header[i]);
    }

    std::vector<std::vector<double>> rows;
    std::vector<double> targets;
    std::vector<std::string> class_names;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells, got " +
                                  std::to_string(cells.size()));
        std::vector<double> row(feature_cols.size());
        for (std::size_t j = 0; j < feature_cols.size(); ++j) {
            if (!parse_number(cells[feature_cols[j]], row[j]))
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": non-numeric value '" + cells[feature_cols[j]] +
                                      "' in feature column " + feature_names[j]);
        }
        rows.push_back(std::move(row));

        const std::string& raw = cells[target_idx];
        if (task_kind == TaskKind::classification) {
            // string labels allowed; mapped to indices in first-appearance order
            auto it = std::find(class_names.begin(), class_names.end(), raw);
            if (it == class_names.end()) {
                class_names.push_back(raw);
                targets.push_back(static_cast<double>(class_names.size() - 1));
            } else {
                targets.push_back(static_cast<double>(it - class_names.begin()));
            }
        } else {
            double v;
            if (!parse_number(raw, v))
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": non-numeric value '" + raw + "' in target column");
            targets.push_back(v);
        }
    }
    if (rows.empty()) throw ValidationError("CSV has no data rows: " + path);

    TabularDataset ds;
    ds.feature_names = std::move(feature_names);
    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < feature_cols.size(); ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    ds.target = Eigen::Map<Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
    ds.task_kind = task_kind;
    ds.class_names = std::move(class_names);
    // source id: file stem
    auto slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    ds.source_id = stem;
    ds.validate();
    return ds;
}

void save_csv(const TabularDataset& dataset, const std::string& path) {
    dataset.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file: " + path);
    for (const auto& name : dataset.feature_names) out << name << ',';
    out << "target\n";
    for (Eigen::Index i = 0; i < dataset.n_rows(); ++i) {
        for (Eigen::Index j = 0; j < dataset.n_features(); ++j)
            out << format_double(dataset.features(i, j)) << ',';
        if (dataset.task_kind == TaskKind::classification)
            out << dataset.class_names[static_cast<std::size_t>(dataset.target(i))];
        else
            out << format_double(dataset.target(i));
        out << '\n';
    }
}

namespace {

TabularDataset take_rows(const TabularDataset& ds, const std::vector<int>& idx) {
    TabularDataset out;
    out.feature_names = ds.feature_names;
    out.task_kind = ds.task_kind;
    out.source_id = ds.source_id;
    out.class_names = ds.class_names;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.n_features());
    out.target.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(idx[i]);
        out.target(static_cast<Eigen::Index>(i)) = ds.target(idx[i]);
    }
    return out;
}

}  // namespace

std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& dataset,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
    dataset.validate();
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ValidationError("test_fraction must lie in (0,1), got " +
                              std::to_string(test_fraction));
    const int n = static_cast<int>(dataset.n_rows());
    if (n < 2) throw ValidationError("dataset too small to split: " + std::to_string(n) + " rows");
    const int n_test = std::max(1, static_cast<int>(std::lround(test_fraction * n)));
    if (n_test >= n) throw ValidationError("test fraction leaves no training rows");

    const int max_attempts = 100;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(sub_seed(seed, static_cast<std::uint64_t>(attempt)));
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<int> test_idx(order.begin(), order.begin() + n_test);
        std::vector<int> train_idx(order.begin() + n_test, order.end());
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());

        if (dataset.task_kind == TaskKind::classification) {
            std::set<int> train_classes;
            for (int i : train_idx) train_classes.insert(static_cast<int>(dataset.target(i)));
            std::set<int> all_classes;
            for (Eigen::Index i = 0; i < dataset.n_rows(); ++i)
                all_classes.insert(static_cast<int>(dataset.target(i)));
            if (train_classes != all_classes) continue;  // re-draw
        }
        return {take_rows(dataset, train_idx), take_rows(dataset, test_idx)};
    }
    throw ValidationError("dataset too small to keep every class in the training split: " +
                          dataset.source_id);
}

Scaler Scaler::fit(ScalerKind kind, const Eigen::MatrixXd& train_features) {
    Scaler s;
    s.kind = kind;
    const Eigen::Index m = train_features.cols();
    s.shift.resize(m);
    s.scale.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto col = train_features.col(j);
        if (kind == ScalerKind::standard) {
            const double mean = col.mean();
            const double var = (col.array() - mean).square().sum() /
                               static_cast<double>(col.size());
            const double sd = std::sqrt(var);
            s.shift(j) = mean;
            s.scale(j) = sd > 0.0 ? sd : 1.0;  // constant columns map to 0
        } else {
            const double lo = col.minCoeff();
            const double hi = col.maxCoeff();
            s.shift(j) = lo;
            s.scale(j) = hi > lo ? hi - lo : 1.0;
        }
    }
    return s;
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& features) const {
    if (features.cols() != shift.size())
        throw ValidationError("scaler fitted on " + std::to_string(shift.size()) +
                              " features, got " + std::to_string(features.cols()));
    return (features.rowwise() - shift.transpose()).array().rowwise() /
           scale.transpose().array();
}

ScaledSplit scale(const TabularDataset& train, const TabularDataset& test, ScalerKind kind) {
    if (train.feature_names != test.feature_names)
        throw ValidationError("train/test feature name lists differ");
    ScaledSplit out{train, test, Scaler::fit(kind, train.features)};
    out.train.features = out.scaler.transform(train.features);
    out.test.features = out.scaler.transform(test.features);
    return out;
}

}  // namespace xai

#include <doctest.h>

#include <algorithm>
#include <set>

#include "test_util.hpp"

using namespace xai;
namespace fs = std::filesystem;

namespace {

fs::path write_csv(const std::string& body, const std::string& name = "data.csv") {
    auto dir = test_util::temp_dir("csv");
    auto path = dir / name;
    test_util::write_file(path, body);
    return path;
}

}  // namespace

TEST_CASE("load_csv basic shapes") {
    auto path = write_csv("a,b,t\n1,2,3\n4,5,6\n7,8,9\n");
    auto ds = load_csv(path.string(), "t", {}, TaskKind::regression);
    CHECK(ds.n_rows() == 3);
    CHECK(ds.n_features() == 2);
    CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.target(2) == doctest::Approx(9.0));
    CHECK(ds.features(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("load_csv drops columns and excludes target") {
    auto path = write_csv("a,b,c,t\n1,2,3,4\n5,6,7,8\n");
    auto ds = load_csv(path.string(), "t", {"b"}, TaskKind::regression);
    CHECK(ds.feature_names == std::vector<std::string>{"a", "c"});
    CHECK(std::find(ds.feature_names.begin(), ds.feature_names.end(), "t") ==
          ds.feature_names.end());
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", "t", {}, TaskKind::regression), IoError);

    auto no_target = write_csv("a,b\n1,2\n");
    CHECK_THROWS_WITH_AS(load_csv(no_target.string(), "t", {}, TaskKind::regression),
                         doctest::Contains("target column not found"), ValidationError);

    auto bad_cell = write_csv("a,t\nhello,2\n");
    CHECK_THROWS_WITH_AS(load_csv(bad_cell.string(), "t", {}, TaskKind::regression),
                         doctest::Contains("non-numeric"), ValidationError);

    auto empty_body = write_csv("a,t\n");
    CHECK_THROWS_WITH_AS(load_csv(empty_body.string(), "t", {}, TaskKind::regression),
                         doctest::Contains("no data rows"), ValidationError);
}

TEST_CASE("classification labels map in first-appearance order") {
    auto path = write_csv("x,y\n1,red\n2,blue\n3,red\n4,green\n");
    auto ds = load_csv(path.string(), "y", {}, TaskKind::classification);
    CHECK(ds.class_names == std::vector<std::string>{"red", "blue", "green"});
    CHECK(ds.target(0) == 0.0);
    CHECK(ds.target(1) == 1.0);
    CHECK(ds.target(2) == 0.0);
    CHECK(ds.target(3) == 2.0);
}

TEST_CASE("bundled iris fixture loads") {
    auto ds = load_csv(std::string(XAI_DATA_DIR) + "/iris.csv", "species", {},
                       TaskKind::classification);
    CHECK(ds.n_rows() == 150);
    CHECK(ds.n_features() == 4);
    CHECK(ds.n_classes() == 3);
}

TEST_CASE("csv round-trip preserves the dataset") {
    auto ds = load_csv(std::string(XAI_DATA_DIR) + "/iris.csv", "species", {},
                       TaskKind::classification);
    auto dir = test_util::temp_dir("roundtrip");
    save_csv(ds, (dir / "copy.csv").string());
    auto back = load_csv((dir / "copy.csv").string(), "target", {}, TaskKind::classification);
    CHECK(back.feature_names == ds.feature_names);
    CHECK(back.class_names == ds.class_names);
    CHECK(back.features == ds.features);
    CHECK(back.target == ds.target);
}

TEST_CASE("train_test_split partitions deterministically") {
    Eigen::MatrixXd X(10, 1);
    for (int i = 0; i < 10; ++i) X(i, 0) = i;
    auto ds = test_util::make_regression_dataset(X, X.col(0));

    auto [train, test] = train_test_split(ds, 0.2, 7);
    CHECK(train.n_rows() == 8);
    CHECK(test.n_rows() == 2);

    // partition: every input row appears in exactly one side
    std::multiset<double> seen;
    for (Eigen::Index i = 0; i < train.n_rows(); ++i) seen.insert(train.features(i, 0));
    for (Eigen::Index i = 0; i < test.n_rows(); ++i) seen.insert(test.features(i, 0));
    CHECK(seen.size() == 10);
    CHECK(std::set<double>(seen.begin(), seen.end()).size() == 10);

    auto [train2, test2] = train_test_split(ds, 0.2, 7);
    CHECK(train2.features == train.features);
    CHECK(test2.features == test.features);

    auto [train3, test3] = train_test_split(ds, 0.2, 8);
    const bool different = train3.features != train.features;
    CHECK(different);
}

TEST_CASE("train_test_split rejects bad fractions and keeps classes in train") {
    Eigen::MatrixXd X(10, 1);
    for (int i = 0; i < 10; ++i) X(i, 0) = i;
    auto ds = test_util::make_regression_dataset(X, X.col(0));
    CHECK_THROWS_AS(train_test_split(ds, 1.5, 0), ValidationError);
    CHECK_THROWS_AS(train_test_split(ds, 0.0, 0), ValidationError);

    // one rare class: it must always stay represented in train
    Eigen::VectorXd y(10);
    y << 0, 0, 0, 0, 0, 0, 0, 0, 0, 1;
    auto cds = test_util::make_classification_dataset(X, y, 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto [train, test] = train_test_split(cds, 0.3, seed);
        CHECK((train.target.array() == 1.0).any());
    }
}

TEST_CASE("scaler definitions") {
    Eigen::MatrixXd train_x(2, 1);
    train_x << 0, 10;
    Eigen::MatrixXd test_x(1, 1);
    test_x << 5;
    auto train = test_util::make_regression_dataset(train_x, Eigen::VectorXd::Zero(2));
    auto test = test_util::make_regression_dataset(test_x, Eigen::VectorXd::Zero(1));

    auto mm = scale(train, test, ScalerKind::min_max);
    CHECK(mm.train.features(0, 0) == doctest::Approx(0.0));
    CHECK(mm.train.features(1, 0) == doctest::Approx(1.0));
    CHECK(mm.test.features(0, 0) == doctest::Approx(0.5));

    Eigen::MatrixXd tx(3, 1);
    tx << 2, 4, 6;
    auto t2 = test_util::make_regression_dataset(tx, Eigen::VectorXd::Zero(3));
    auto st = scale(t2, t2, ScalerKind::standard);
    CHECK(st.train.features.col(0).mean() == doctest::Approx(0.0).epsilon(1e-9));
    const double sd = std::sqrt(st.train.features.col(0).squaredNorm() / 3.0);
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant columns scale to zero without division failures") {
    Eigen::MatrixXd cx(3, 1);
    cx << 5, 5, 5;
    auto ds = test_util::make_regression_dataset(cx, Eigen::VectorXd::Zero(3));
    for (auto kind : {ScalerKind::standard, ScalerKind::min_max}) {
        auto s = scale(ds, ds, kind);
        CHECK(s.train.features.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("scaling is train-leak-free") {
    Eigen::MatrixXd train_x(4, 2);
    train_x << 1, 10, 2, 20, 3, 30, 4, 40;
    Eigen::MatrixXd test_x(3, 2);
    test_x << 9, 1, 8, 2, 7, 3;
    auto train = test_util::make_regression_dataset(train_x, Eigen::VectorXd::Zero(4));
    auto test = test_util::make_regression_dataset(test_x, Eigen::VectorXd::Zero(3));
    auto a = scale(train, test, ScalerKind::standard);

    Eigen::MatrixXd permuted = test_x;
    permuted.row(0).swap(permuted.row(2));
    auto test_p = test_util::make_regression_dataset(permuted, Eigen::VectorXd::Zero(3));
    auto b = scale(train, test_p, ScalerKind::standard);
    CHECK(a.scaler.shift == b.scaler.shift);
    CHECK(a.scaler.scale == b.scaler.scale);
}

TEST_CASE("scale rejects mismatched feature lists") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    auto a = test_util::make_regression_dataset(x, Eigen::VectorXd::Zero(2));
    auto b = a;
    b.feature_names[0] = "other";
    CHECK_THROWS_AS(scale(a, b, ScalerKind::standard), ValidationError);
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "xai/dissonance.hpp"

using namespace xai;

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}
}  // namespace

TEST_CASE("pearson reference values") {
    auto identical = pearson(vec({1, 2, 3}), vec({1, 2, 3}));
    REQUIRE(identical.defined);
    CHECK(identical.value == doctest::Approx(1.0).epsilon(1e-12));

    auto flipped = pearson(vec({1, 2, 3}), vec({3, 2, 1}));
    REQUIRE(flipped.defined);
    CHECK(flipped.value == doctest::Approx(-1.0).epsilon(1e-12));

    auto partial = pearson(vec({1, 2, 3, 4}), vec({1, 3, 2, 4}));
    REQUIRE(partial.defined);
    CHECK(partial.value == doctest::Approx(0.8).epsilon(1e-12));

    auto mags = pearson(vec({0.5, 0.6, 0.7}), vec({0.2, 0.4, 0.9}));
    REQUIRE(mags.defined);
    CHECK(mags.value == doctest::Approx(0.97073).epsilon(1e-4));
}

TEST_CASE("pearson undefined and error cases") {
    CHECK_FALSE(pearson(vec({2, 2, 2}), vec({1, 2, 3})).defined);
    CHECK_FALSE(pearson(vec({1, 2, 3}), vec({5, 5, 5})).defined);
    CHECK_FALSE(pearson(vec({1}), vec({2})).defined);
    CHECK_THROWS_AS(pearson(vec({1, 2}), vec({1, 2, 3})), ValidationError);
}

TEST_CASE("pearson properties hold on random vectors") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd x(10), y(10);
        for (int i = 0; i < 10; ++i) {
            x(i) = gauss(rng);
            y(i) = gauss(rng);
        }
        auto xy = pearson(x, y);
        auto yx = pearson(y, x);
        REQUIRE(xy.defined);
        CHECK(xy.value == doctest::Approx(yx.value).epsilon(1e-12));  // symmetric
        CHECK(std::abs(xy.value) <= 1.0);                             // bounded

        // invariant to positive affine maps
        auto scaled = pearson((2.5 * x.array() - 7.0).matrix(), y);
        CHECK(scaled.value == doctest::Approx(xy.value).epsilon(1e-9));
        auto negated = pearson((-x.array()).matrix(), y);
        CHECK(negated.value == doctest::Approx(-xy.value).epsilon(1e-9));
    }
}

TEST_CASE("average correlation is the mean with undefined entries as zero") {
    auto [a, b] = test_util::tables_with_correlations({1.0, 0.5, kNaN, 0.6});
    CHECK(average_correlation(a, b) == doctest::Approx((1.0 + 0.5 + 0.0 + 0.6) / 4.0).epsilon(1e-9));

    auto report = compare_explanations(a, b);
    CHECK(report.undefined_count == 1);
    CHECK_FALSE(report.per_feature.at("f2").defined);
    CHECK(report.per_feature.at("f0").value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.average == doctest::Approx(0.525).epsilon(1e-9));
}

TEST_CASE("average correlation matches a direct per-feature transliteration") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> rs(6);
    for (auto& r : rs) r = unif(rng);
    auto [a, b] = test_util::tables_with_correlations(rs);

    // independent recomputation straight from the score matrices
    auto sa = a.score_matrix();
    auto sb = b.score_matrix();
    double total = 0.0;
    for (int j = 0; j < sa.cols(); ++j) {
        auto r = pearson(sa.col(j), sb.col(j));
        total += r.effective();
    }
    CHECK(average_correlation(a, b) ==
          doctest::Approx(total / static_cast<double>(sa.cols())).epsilon(1e-12));
}

TEST_CASE("requested correlations are realized exactly") {
    std::vector<double> rs = {0.878, -0.25, 0.0, 0.999};
    auto [a, b] = test_util::tables_with_correlations(rs);
    auto report = compare_explanations(a, b);
    for (std::size_t j = 0; j < rs.size(); ++j) {
        auto cv = report.per_feature.at("f" + std::to_string(j));
        REQUIRE(cv.defined);
        CHECK(cv.value == doctest::Approx(rs[j]).epsilon(1e-9));
    }
}

TEST_CASE("max-importance series takes the rank-0 magnitude per instance") {
    std::vector<std::string> names = {"a", "b"};
    Eigen::MatrixXd scores(3, 2);
    scores << 0.5, -0.9,  // max 0.9
              -0.3, 0.1,  // max 0.3
              0.0, 0.2;   // max 0.2
    auto t = make_explanation_table("shap", "s", "m", names, scores, Eigen::MatrixXd::Zero(3, 2));
    auto series = max_importance_series(t);
    CHECK(series == vec({0.9, 0.3, 0.2}));
}

TEST_CASE("correlation of max-importance series matches the closed form") {
    std::vector<std::string> names = {"a"};
    Eigen::MatrixXd sa(3, 1), sb(3, 1);
    sa << 0.5, 0.6, 0.7;
    sb << 0.2, 0.4, 0.9;
    auto ta = make_explanation_table("shap", "s", "m", names, sa, Eigen::MatrixXd::Zero(3, 1));
    auto tb = make_explanation_table("lime", "s", "m", names, sb, Eigen::MatrixXd::Zero(3, 1));
    auto cm = correlation_max(ta, tb);
    REQUIRE(cm.defined);
    CHECK(cm.value == doctest::Approx(0.97073).epsilon(1e-4));

    auto report = compare_explanations(ta, tb);
    REQUIRE(report.correlation_max.defined);
    CHECK(report.correlation_max.value == doctest::Approx(cm.value).epsilon(1e-12));
}

TEST_CASE("sample variance reference values") {
    CHECK(sample_variance(vec({0.666, 1.000, 0.294, 0.989, 0.449, 0.854, 0.732})) ==
          doctest::Approx(0.071041).epsilon(1e-3));
    CHECK(sample_variance(vec({0.138, 0.199, 0.210, 0.0167, 0.0496, 0.200, 0.036})) ==
          doctest::Approx(0.00729).epsilon(1e-2));
    CHECK(sample_variance(vec({3.0, 3.0, 3.0})) == 0.0);
    CHECK(sample_variance(vec({1.0, 3.0})) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(sample_variance(vec({1.0})), ValidationError);
}

TEST_CASE("tables with mismatched features cannot be compared") {
    auto [a, b] = test_util::tables_with_correlations({0.5, 0.5});
    auto c = b;
    c.feature_names[1] = "other";
    for (auto& row : c.rows)
        if (row.feature == "f1") row.feature = "other";
    CHECK_THROWS_AS(compare_explanations(a, c), ValidationError);

    auto d = b;
    d.n_instances = 2;
    d.rows.resize(4);
    CHECK_THROWS_AS(compare_explanations(a, d), ValidationError);
}

TEST_CASE("correlation report export lists features and summary lines") {
    auto [a, b] = test_util::tables_with_correlations({0.9, kNaN});
    auto report = compare_explanations(a, b);
    auto dir = test_util::temp_dir("report");
    auto path = (dir / "report.csv").string();
    export_correlation_report(report, path);
    auto text = test_util::read_file(path);
    CHECK(text.find("feature,correlation,defined\n") == 0);
    CHECK(text.find("f0,") != std::string::npos);
    CHECK(text.find("#average,") != std::string::npos);
    CHECK(text.find("#correlation_max,") != std::string::npos);
    CHECK(text.find("#undefined_count,1") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "test_util.hpp"
#include "tmixad/dataset.hpp"
#include "tmixad/errors.hpp"

using namespace tmixad;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "tmixad_dataset_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_text(const std::string& name, const std::string& contents) {
    fs::path p = temp_file(name);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << contents;
    return p;
}

}  // namespace

TEST_CASE("load_csv basic parsing") {
    fs::path p = write_text("basic.csv", "a,b,label\n1,2,0\n3.5,-4,1\n0,0.25,0\n");

    Dataset all = load_csv(p.string());
    CHECK(all.rows() == 3);
    CHECK(all.cols() == 3);
    CHECK(!all.labels.has_value());
    CHECK(all.features(1, 0) == 3.5);
    CHECK(all.features(1, 2) == 1.0);
    CHECK(all.name == "basic");

    Dataset labeled = load_csv(p.string(), std::string("label"));
    CHECK(labeled.rows() == 3);
    CHECK(labeled.cols() == 2);
    REQUIRE(labeled.labels.has_value());
    CHECK((*labeled.labels)(0) == 0);
    CHECK((*labeled.labels)(1) == 1);
    CHECK(labeled.features(1, 1) == -4.0);
}

TEST_CASE("load_csv tolerates trailing blank line and CR line ends") {
    fs::path p = write_text("crlf.csv", "x,y\r\n1,2\r\n3,4\r\n\r\n");
    Dataset ds = load_csv(p.string());
    CHECK(ds.rows() == 2);
    CHECK(ds.features(1, 1) == 4.0);
}

TEST_CASE("load_csv error contracts") {
    fs::path bad_cell = write_text("badcell.csv", "a,b\n1,oops\n");
    try {
        load_csv(bad_cell.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 1") != std::string::npos);
        CHECK(msg.find("\"b\"") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }

    fs::path ragged = write_text("ragged.csv", "a,b\n1,2\n3\n");
    try {
        load_csv(ragged.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("expected 2") != std::string::npos);
    }

    CHECK_THROWS_AS(load_csv((temp_file("missing_zzz.csv")).string()), DataError);

    fs::path bad_label = write_text("badlabel.csv", "a,label\n1,2\n");
    CHECK_THROWS_AS(load_csv(bad_label.string(), std::string("label")), DataError);

    fs::path float_label = write_text("floatlabel.csv", "a,label\n1,1.0\n");
    CHECK_THROWS_AS(load_csv(float_label.string(), std::string("label")), DataError);

    fs::path ok = write_text("nolabelcol.csv", "a,b\n1,2\n");
    CHECK_THROWS_AS(load_csv(ok.string(), std::string("label")), DataError);

    fs::path empty = write_text("empty.csv", "");
    CHECK_THROWS_AS(load_csv(empty.string()), DataError);

    fs::path header_only = write_text("headeronly.csv", "a,b\n");
    CHECK_THROWS_AS(load_csv(header_only.string()), DataError);

    fs::path inf_cell = write_text("infcell.csv", "a\ninf\n");
    CHECK_THROWS_AS(load_csv(inf_cell.string()), DataError);
}

TEST_CASE("write_csv round trips bitwise") {
    std::mt19937_64 gen(5);
    Dataset ds;
    ds.features = testutil::random_matrix(7, 3, gen, -100.0, 100.0);
    ds.features(0, 0) = 1.0 / 3.0;
    ds.features(1, 1) = 1e-17;
    ds.features(2, 2) = -123456789.123456789;
    Eigen::VectorXi labels(7);
    labels << 0, 1, 0, 0, 1, 1, 0;
    ds.labels = labels;
    ds.name = "roundtrip";

    fs::path p = temp_file("roundtrip.csv");
    write_csv(ds, p.string());
    Dataset back = load_csv(p.string(), std::string("label"));
    CHECK(back.rows() == 7);
    CHECK(back.cols() == 3);
    CHECK(back.features == ds.features);
    CHECK(*back.labels == *ds.labels);
}

TEST_CASE("standardization hand cases") {
    Dataset train;
    train.features.resize(2, 2);
    train.features << 0, 5, 2, 5;
    auto [out, stats] = standardize_fit_apply(train, {});
    CHECK(stats.mean(0) == 1.0);
    CHECK(stats.std(0) == 1.0);  // population std of {0,2}
    CHECK(stats.mean(1) == 5.0);
    CHECK(stats.std(1) == 1.0);  // constant column guard
    CHECK(out[0].features(0, 0) == -1.0);
    CHECK(out[0].features(1, 0) == 1.0);
    CHECK(out[0].features(0, 1) == 0.0);

    Dataset fresh;
    fresh.features.resize(1, 2);
    fresh.features << 3, 7;
    Dataset applied = apply_standardization(fresh, stats);
    CHECK(applied.features(0, 0) == 2.0);
    CHECK(applied.features(0, 1) == 2.0);

    Dataset wrong;
    wrong.features.resize(1, 3);
    wrong.features << 1, 2, 3;
    CHECK_THROWS_AS(apply_standardization(wrong, stats), DataError);
}

TEST_CASE("standardized training data has zero mean and unit variance") {
    std::mt19937_64 gen(9);
    Dataset train;
    train.features = testutil::random_matrix(50, 4, gen, -10.0, 30.0);
    auto [out, stats] = standardize_fit_apply(train, {});
    const Eigen::MatrixXd& X = out[0].features;
    for (int c = 0; c < 4; ++c) {
        double m = X.col(c).mean();
        double var = (X.col(c).array() - m).square().sum() / 50.0;
        CHECK(std::abs(m) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-9);
    }
    // the same stats transform companion sets
    Dataset other;
    other.features = testutil::random_matrix(5, 4, gen);
    auto [both, stats2] = standardize_fit_apply(train, {other});
    CHECK(both.size() == 2);
    CHECK(both[1].features == apply_standardization(other, stats2).features);
}

TEST_CASE("split_inductive stratified hand case") {
    Dataset ds;
    ds.features.resize(10, 1);
    for (int i = 0; i < 10; ++i) ds.features(i, 0) = i;
    Eigen::VectorXi labels(10);
    labels << 0, 0, 0, 0, 0, 0, 0, 0, 1, 1;
    ds.labels = labels;
    ds.name = "mini";

    SplitSpec spec;
    spec.train_fraction = 0.5;
    spec.seed = 3;
    auto [train, test] = split_inductive(ds, spec);
    CHECK(train.rows() == 5);  // floor(8*0.5) + floor(2*0.5)
    CHECK(test.rows() == 5);
    CHECK(train.labels->sum() == 1);
    CHECK(test.labels->sum() == 1);
    CHECK(train.name == "mini:train");
    CHECK(test.name == "mini:test");

    // partition: every original row appears exactly once across the two sides
    std::vector<int> seen(10, 0);
    for (int i = 0; i < train.rows(); ++i) seen[static_cast<int>(train.features(i, 0))]++;
    for (int i = 0; i < test.rows(); ++i) seen[static_cast<int>(test.features(i, 0))]++;
    for (int i = 0; i < 10; ++i) CHECK(seen[i] == 1);

    // row order within each side follows the original order
    for (int i = 1; i < train.rows(); ++i)
        CHECK(train.features(i, 0) > train.features(i - 1, 0));
}

TEST_CASE("split_inductive determinism and seed sensitivity") {
    std::mt19937_64 gen(31);
    Dataset ds;
    ds.features = testutil::random_matrix(40, 2, gen);
    Eigen::VectorXi labels = Eigen::VectorXi::Zero(40);
    for (int i = 32; i < 40; ++i) labels(i) = 1;
    ds.labels = labels;

    SplitSpec spec;
    spec.train_fraction = 0.5;
    spec.seed = 11;
    auto [a_train, a_test] = split_inductive(ds, spec);
    auto [b_train, b_test] = split_inductive(ds, spec);
    CHECK(a_train.features == b_train.features);
    CHECK(a_test.features == b_test.features);

    spec.seed = 12;
    auto [c_train, c_test] = split_inductive(ds, spec);
    CHECK(a_train.features != c_train.features);
}

TEST_CASE("split_inductive non-stratified and error contracts") {
    Dataset ds;
    ds.features.resize(10, 1);
    for (int i = 0; i < 10; ++i) ds.features(i, 0) = i;

    SplitSpec spec;
    spec.train_fraction = 0.7;
    spec.stratified = false;
    auto [train, test] = split_inductive(ds, spec);
    CHECK(train.rows() == 7);
    CHECK(test.rows() == 3);
    CHECK(!train.labels.has_value());

    SplitSpec strat;
    strat.stratified = true;
    CHECK_THROWS_AS(split_inductive(ds, strat), DataError);

    SplitSpec zero;
    zero.train_fraction = 0.0;
    zero.stratified = false;
    CHECK_THROWS_AS(split_inductive(ds, zero), DataError);

    SplitSpec over;
    over.train_fraction = 1.5;
    over.stratified = false;
    CHECK_THROWS_AS(split_inductive(ds, over), DataError);
}

TEST_CASE("toy dataset layout") {
    Dataset toy = generate_group_anomaly_toy(1);
    CHECK(toy.rows() == 930);
    CHECK(toy.cols() == 2);
    REQUIRE(toy.labels.has_value());
    CHECK(toy.labels->sum() == 30);
    CHECK(toy.name == "toy");

    Dataset again = generate_group_anomaly_toy(1);
    CHECK(toy.features == again.features);
    Dataset other = generate_group_anomaly_toy(2);
    CHECK(toy.features != other.features);

    // anomalies huddle tightly around (5, 4) inside the hull of the normal
    // clusters
    Eigen::Vector2d mean_anom = Eigen::Vector2d::Zero();
    int n_anom = 0;
    for (int i = 0; i < 930; ++i)
        if ((*toy.labels)(i) == 1) {
            mean_anom += toy.features.row(i).transpose();
            ++n_anom;
        }
    mean_anom /= n_anom;
    CHECK(n_anom == 30);
    CHECK(std::abs(mean_anom(0) - 5.0) < 0.5);
    CHECK(std::abs(mean_anom(1) - 4.0) < 0.5);

    double spread_anom = 0.0;
    for (int i = 900; i < 930; ++i)
        spread_anom += (toy.features.row(i).transpose() - mean_anom).squaredNorm();
    spread_anom = std::sqrt(spread_anom / 30.0);
    CHECK(spread_anom < 1.0);  // generator std is 0.3

    Eigen::Vector2d mean_c0 = toy.features.topRows(300).colwise().mean().transpose();
    double spread_c0 = 0.0;
    for (int i = 0; i < 300; ++i)
        spread_c0 += (toy.features.row(i).transpose() - mean_c0).squaredNorm();
    spread_c0 = std::sqrt(spread_c0 / 300.0);
    CHECK(spread_c0 > spread_anom);
}

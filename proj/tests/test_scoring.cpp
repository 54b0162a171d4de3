#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tmixad/errors.hpp"
#include "tmixad/rng.hpp"
#include "tmixad/scoring.hpp"

using namespace tmixad;

namespace {

const double kPi = 3.141592653589793238462643383279;

MixtureParams single_unit(int d) {
    MixtureParams m;
    m.weights = Eigen::VectorXd::Ones(1);
    m.prototypes = Eigen::MatrixXd::Zero(1, d);
    m.scales = Eigen::MatrixXd::Ones(1, d);
    return m;
}

}  // namespace

TEST_CASE("scalar_score closed forms") {
    MixtureParams m = single_unit(2);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
    // density pi^-1 at the prototype, so the score is pi
    CHECK(scalar_score(z, m) == doctest::Approx(kPi).epsilon(1e-14));

    // moving away from the only prototype raises the score monotonically
    double prev = 0.0;
    for (int step = 0; step <= 6; ++step) {
        Eigen::VectorXd p(2);
        p << 0.5 * step, 0.25 * step;
        double s = scalar_score(p, m);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("scalar_score is the reciprocal of the marginal") {
    std::mt19937_64 gen(11);
    MixtureParams m = testutil::random_mixture(3, 3, gen, DensityMode::CauchyKernel);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd z = testutil::random_matrix(1, 3, gen).row(0).transpose();
        CHECK(scalar_score(z, m) == 1.0 / marginal_likelihood(z, m));
    }
}

TEST_CASE("vector_score with one component equals scalar_score to the bit") {
    std::mt19937_64 gen(13);
    MixtureParams m = testutil::random_mixture(1, 3, gen, DensityMode::CauchyKernel);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd z = testutil::random_matrix(1, 3, gen, -4.0, 4.0).row(0).transpose();
        if ((z - m.prototypes.row(0).transpose()).norm() < kForceNormFloor) continue;
        CHECK(vector_score(z, m) == scalar_score(z, m));
    }
}

TEST_CASE("opposed equal pulls cancel to the ceiling") {
    MixtureParams m;
    m.weights = Eigen::VectorXd::Constant(2, 0.5);
    m.prototypes = Eigen::MatrixXd(2, 2);
    m.prototypes << 3, 1, -3, -1;
    m.scales = Eigen::MatrixXd::Ones(2, 2);
    Eigen::VectorXd mid = Eigen::VectorXd::Zero(2);
    CHECK(vector_score(mid, m) == kScoreCeiling);

    // sitting exactly on a prototype also hits the clamp when it is the only
    // component
    MixtureParams one = single_unit(2);
    Eigen::VectorXd at = Eigen::VectorXd::Zero(2);
    CHECK(vector_score(at, one) == kScoreCeiling);
}

TEST_CASE("between-cluster points outscore cluster cores") {
    // two tight clusters: the midpoint has forces cancelling, a point near
    // one prototype is pulled hard toward it
    MixtureParams m;
    m.weights = Eigen::VectorXd::Constant(2, 0.5);
    m.prototypes = Eigen::MatrixXd(2, 1);
    m.prototypes << -5.0, 5.0;
    m.scales = Eigen::MatrixXd::Ones(2, 1);

    Eigen::VectorXd mid(1), core(1);
    mid << 0.0;
    core << 4.5;
    CHECK(vector_score(mid, m) > vector_score(core, m));
}

TEST_CASE("vector_score dominates scalar_score") {
    // the net force norm is at most the sum of the force magnitudes, which is
    // the marginal itself
    std::mt19937_64 gen(17);
    for (DensityMode mode : {DensityMode::CauchyKernel, DensityMode::StudentT}) {
        MixtureParams m = testutil::random_mixture(3, 2, gen, mode);
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd z = testutil::random_matrix(1, 2, gen, -4.0, 4.0).row(0).transpose();
            CHECK(vector_score(z, m) >= scalar_score(z, m) * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("scores are translation invariant") {
    std::mt19937_64 gen(19);
    MixtureParams m = testutil::random_mixture(3, 2, gen, DensityMode::CauchyKernel);
    MixtureParams ms = m;
    Eigen::RowVector2d c(-2.5, 4.0);
    ms.prototypes.rowwise() += c;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd z = testutil::random_matrix(1, 2, gen).row(0).transpose();
        Eigen::VectorXd zs = z + c.transpose();
        CHECK(scalar_score(zs, ms) == doctest::Approx(scalar_score(z, m)).epsilon(1e-12));
        CHECK(vector_score(zs, ms) == doctest::Approx(vector_score(z, m)).epsilon(1e-12));
    }
}

TEST_CASE("score_all matches the single-point functions exactly") {
    std::mt19937_64 gen(23);
    MixtureParams m = testutil::random_mixture(3, 2, gen, DensityMode::CauchyKernel);
    Eigen::MatrixXd Z = testutil::random_matrix(15, 2, gen);

    Eigen::VectorXd sc = score_all(Z, m, ScoreMode::Scalar);
    Eigen::VectorXd vc = score_all(Z, m, ScoreMode::Vector);
    for (int i = 0; i < 15; ++i) {
        CHECK(sc(i) == scalar_score(Z.row(i).transpose(), m));
        CHECK(vc(i) == vector_score(Z.row(i).transpose(), m));
    }

    // permuting the rows permutes the scores
    Eigen::MatrixXd Zp(15, 2);
    for (int i = 0; i < 15; ++i) Zp.row(i) = Z.row(14 - i);
    Eigen::VectorXd vp = score_all(Zp, m, ScoreMode::Vector);
    for (int i = 0; i < 15; ++i) CHECK(vp(i) == vc(14 - i));

    // one component: the two modes agree row for row
    MixtureParams one = testutil::random_mixture(1, 2, gen, DensityMode::CauchyKernel);
    CHECK(score_all(Z, one, ScoreMode::Scalar) == score_all(Z, one, ScoreMode::Vector));
}

TEST_CASE("select_outliers hand cases") {
    Eigen::VectorXd s(10);
    s << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9;
    OutlierSet sel = select_outliers(s, 0.2);
    CHECK(sel.removed == std::vector<int>{8, 9});
    CHECK(sel.kept == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(sel.fraction == 0.2);

    OutlierSet none = select_outliers(s, 0.0);
    CHECK(none.removed.empty());
    CHECK(none.kept.size() == 10);

    Eigen::VectorXd s5(5);
    s5 << 10, 50, 20, 40, 30;
    OutlierSet half = select_outliers(s5, 0.5);  // floor(2.5) = 2
    CHECK(half.removed == std::vector<int>{1, 3});
    CHECK(half.kept == std::vector<int>{0, 2, 4});

    CHECK_THROWS_AS(select_outliers(s, 1.0), DataError);
    CHECK_THROWS_AS(select_outliers(s, -0.1), DataError);
}

TEST_CASE("select_outliers breaks ties toward the lower index") {
    Eigen::VectorXd s = Eigen::VectorXd::Constant(10, 7.0);
    OutlierSet sel = select_outliers(s, 0.3);
    CHECK(sel.removed == std::vector<int>{0, 1, 2});

    // a tie straddling the cut: indices 4 and 7 share the top-2 boundary value
    Eigen::VectorXd t(8);
    t << 1, 2, 3, 4, 9, 5, 6, 9;
    OutlierSet sel2 = select_outliers(t, 0.25);
    CHECK(sel2.removed == std::vector<int>{4, 7});

    Eigen::VectorXd t2(8);
    t2 << 1, 2, 3, 9, 9, 9, 6, 7;
    OutlierSet sel3 = select_outliers(t2, 0.25);  // three-way tie, two slots
    CHECK(sel3.removed == std::vector<int>{3, 4});
}

TEST_CASE("select_outliers count follows floor(N*l)") {
    std::mt19937_64 gen(29);
    Eigen::VectorXd s(17);
    for (int i = 0; i < 17; ++i) s(i) = uniform01(gen);
    for (double l : {0.0, 0.05, 0.1, 0.25, 0.4999, 0.999}) {
        OutlierSet sel = select_outliers(s, l);
        CHECK(static_cast<int>(sel.removed.size()) == static_cast<int>(std::floor(17 * l)));
        CHECK(sel.removed.size() + sel.kept.size() == 17);
        // removed scores never sit below kept scores
        double min_removed = std::numeric_limits<double>::infinity();
        for (int i : sel.removed) min_removed = std::min(min_removed, s(i));
        for (int i : sel.kept) CHECK(s(i) <= min_removed);
    }
}

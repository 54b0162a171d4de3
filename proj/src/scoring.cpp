#include "tmixad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmixad/errors.hpp"

namespace tmixad {

double scalar_score(const Eigen::VectorXd& z, const MixtureParams& params) {
    return 1.0 / std::max(marginal_likelihood(z, params), kLikelihoodFloor);
}

double vector_score(const Eigen::VectorXd& z, const MixtureParams& params) {
    const int K = params.components();
    const int d = params.latent_dim();
    if (z.size() != d) throw DataError("vector_score: latent dimension mismatch");

    if (K == 1) {
        // Single attractor: the net-force magnitude equals the force itself,
        // so return the scalar form verbatim and keep the identity exact to
        // the last bit (unless the sample sits on the prototype).
        double dist = (params.prototypes.row(0).transpose() - z).norm();
        if (dist >= kForceNormFloor) return scalar_score(z, params);
        return kScoreCeiling;
    }

    Eigen::VectorXd net = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXd dir = params.prototypes.row(k).transpose() - z;
        double dist = dir.norm();
        if (dist < kForceNormFloor) continue;  // on the prototype, no direction
        net += (component_force(z, k, params) / dist) * dir;
    }
    return 1.0 / std::max(net.norm(), kForceNormFloor);
}

Eigen::VectorXd score_all(const Eigen::MatrixXd& Z, const MixtureParams& params,
                          ScoreMode mode) {
    const int N = static_cast<int>(Z.rows());
    Eigen::VectorXd out(N);
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd z = Z.row(i).transpose();
        out(i) = mode == ScoreMode::Scalar ? scalar_score(z, params) : vector_score(z, params);
    }
    return out;
}

OutlierSet select_outliers(const Eigen::VectorXd& scores, double l) {
    if (!(l >= 0.0 && l < 1.0)) throw DataError("select_outliers: fraction must be in [0,1)");
    const int N = static_cast<int>(scores.size());
    const int m = static_cast<int>(std::floor(N * l));

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores(a) != scores(b)) return scores(a) > scores(b);
        return a < b;  // tied scores: lower index is removed first
    });

    OutlierSet out;
    out.fraction = l;
    out.removed.assign(order.begin(), order.begin() + m);
    out.kept.assign(order.begin() + m, order.end());
    std::sort(out.removed.begin(), out.removed.end());
    std::sort(out.kept.begin(), out.kept.end());
    return out;
}

}  // namespace tmixad

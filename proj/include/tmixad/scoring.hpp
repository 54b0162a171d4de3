#pragma once

#include <Eigen/Core>
#include <vector>

#include "tmixad/mixture.hpp"

namespace tmixad {

enum class ScoreMode { Scalar, Vector };

// Net-force norm floor and the matching score ceiling. A sample pulled
// equally in opposite directions has zero net force; the clamp keeps its
// score finite.
inline constexpr double kForceNormFloor = 1e-12;
inline constexpr double kScoreCeiling = 1e12;  // 1 / kForceNormFloor

// Reciprocal of the marginal likelihood. Higher = more anomalous.
double scalar_score(const Eigen::VectorXd& z, const MixtureParams& params);

// Reciprocal of || sum_k F_ik * (mu_k - z)/||mu_k - z|| ||. Components closer
// than kForceNormFloor to z contribute no direction. With a single component
// this equals scalar_score exactly.
double vector_score(const Eigen::VectorXd& z, const MixtureParams& params);

// Row-wise application of the chosen score, order preserving.
Eigen::VectorXd score_all(const Eigen::MatrixXd& Z, const MixtureParams& params,
                          ScoreMode mode);

// floor(N*l) highest-scoring indices marked as removed, ties resolved toward
// the lower index. Both index lists come back sorted ascending.
struct OutlierSet {
    std::vector<int> removed;
    std::vector<int> kept;
    double fraction = 0.0;
};

OutlierSet select_outliers(const Eigen::VectorXd& scores, double l);

}  // namespace tmixad

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace tmixad {

// Which per-component density drives likelihoods, EM weights, and scores.
//   CauchyKernel: omega * pi^-1 * |Sigma|^-1/2 / (1 + D^2). First-order heavy
//     tailed kernel, the library default. Not a normalized density for d > 1,
//     so EM ascent is not guaranteed (it is logged, not asserted).
//   StudentT: proper nu=1 multivariate Student-t, power -(1+d)/2 with the
//     matching Gamma normalizer. Standard EM monotonicity holds.
//   Gaussian: diagonal Gaussian, reachable only through the gaussian_mixture
//     ablation of the trainer.
enum class DensityMode { CauchyKernel, StudentT, Gaussian };

// Mixture over the latent space: K weights on the simplex, K prototype rows,
// K rows of strictly positive diagonal covariance entries.
struct MixtureParams {
    Eigen::VectorXd weights;     // K
    Eigen::MatrixXd prototypes;  // K x d
    Eigen::MatrixXd scales;      // K x d, each entry >= kScaleFloor
    DensityMode density_mode = DensityMode::CauchyKernel;
    // EM-only switch: scale factor u uses the unsquared Mahalanobis distance,
    // u = 2/(1+D) instead of 2/(1+D^2). CauchyKernel mode only.
    bool u_unsquared = false;

    int components() const { return static_cast<int>(weights.size()); }
    int latent_dim() const { return static_cast<int>(prototypes.cols()); }
};

inline constexpr double kScaleFloor = 1e-6;
// Smallest marginal likelihood fed into log() or 1/x. Only the Gaussian
// ablation can underflow to zero; the power-law modes cannot.
inline constexpr double kLikelihoodFloor = 1e-300;

// Posterior component memberships, rows sum to 1.
struct Responsibilities {
    Eigen::MatrixXd tau;  // N x K
};

// EM scale factors. Range (0,2] in CauchyKernel mode, (0,1+d] in StudentT
// mode, identically 1 in Gaussian mode.
struct ScaleFactors {
    Eigen::MatrixXd u;  // N x K
};

// sum_j (z_j - prototype_j)^2 / scale_j. Throws NumericError on a
// nonpositive scale entry.
double mahalanobis_sq(const Eigen::VectorXd& z, const Eigen::VectorXd& prototype,
                      const Eigen::VectorXd& scale);

// Weighted per-component density value, read as a force magnitude by the
// scoring module. Strictly positive in the power-law modes.
double component_force(const Eigen::VectorXd& z, int k, const MixtureParams& params);

// Sum of component forces.
double marginal_likelihood(const Eigen::VectorXd& z, const MixtureParams& params);

// Responsibilities tau_ik = F_ik / sum_j F_ij and scale factors u_ik for
// every row of Z.
std::pair<Responsibilities, ScaleFactors> e_step(const Eigen::MatrixXd& Z,
                                                 const MixtureParams& params);

// Closed-form parameter update over the kept rows:
//   omega_k = sum_kept tau_ik / |kept|
//   mu_k    = sum tau u z / sum tau u
//   Sigma_k = sum tau u (z-mu)^2 / sum_kept tau_ik, floored at kScaleFloor.
// A component whose responsibility mass falls below 1e-12 is re-seeded at the
// lowest-likelihood kept point (likelihood under `current`). `current` also
// carries the density mode into the result.
MixtureParams m_step(const Eigen::MatrixXd& Z, const Responsibilities& resp,
                     const ScaleFactors& sf, const std::vector<int>& kept,
                     const MixtureParams& current);

// sum over kept rows of log marginal likelihood. Empty kept set gives 0.
double trimmed_log_likelihood(const Eigen::MatrixXd& Z, const MixtureParams& params,
                              const std::vector<int>& kept);

// Distance-weighted prototype seeding (k-means++ style), uniform weights,
// per-dimension global variance scales. Deterministic per seed. Throws
// DataError when N < K.
MixtureParams init_mixture(const Eigen::MatrixXd& Z, int K, std::uint64_t seed,
                           DensityMode mode = DensityMode::CauchyKernel,
                           bool u_unsquared = false);

struct EmResult {
    MixtureParams params;
    int iterations = 0;
    double final_j = 0.0;
    // j_history[0] is the objective of the initial params, then one entry per
    // completed iteration. Exposed so callers can audit convergence.
    std::vector<double> j_history;
};

// Alternate e_step/m_step on the kept rows until |J - J_old| <= tol or
// max_iter iterations. tol = +infinity performs exactly one iteration.
EmResult fit_em(const Eigen::MatrixXd& Z, int K, const std::vector<int>& kept,
                const MixtureParams& init, double tol, int max_iter);

}  // namespace tmixad

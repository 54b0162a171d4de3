#pragma once

#include <cstdint>
#include <vector>

#include "tmixad/dataset.hpp"
#include "tmixad/encoder.hpp"
#include "tmixad/mixture.hpp"
#include "tmixad/scoring.hpp"

namespace tmixad {

struct TrainConfig {
    int K = 10;                 // mixture components
    double l = 0.01;            // trimmed outlier fraction, in [0,1)
    double em_tol = 1e-3;       // EM stop: |J - J_old| <= em_tol
    int em_max_iter = 100;
    int epochs = 100;           // encoder epochs per outer iteration
    double lr = 1e-4;
    int hidden = 128;
    int latent = 0;             // 0 = min(D, 8)
    int outer_iters = 10;
    std::uint64_t seed = 0;
    DensityMode density_mode = DensityMode::CauchyKernel;
    ScoreMode score_mode = ScoreMode::Vector;
    bool u_unsquared = false;
    // Skip the MLP entirely: embeddings are the standardized features
    // themselves (latent forced to D, no reconstruction term, no encoder
    // training). Turns the fit into trimmed mixture EM on raw features.
    bool identity_embedding = false;
    // Ablations, at most one may be set.
    bool gaussian_mixture = false;      // Gaussian densities everywhere
    bool no_joint_likelihood = false;   // encoder sees reconstruction loss only
    bool no_indicator = false;          // trimming disabled
};

struct Model {
    EncoderParams encoder;  // empty tensors when identity_embedding is set
    MixtureParams mixture;
    StandardizationStats standardization;
    TrainConfig config;

    int input_dim() const { return static_cast<int>(standardization.mean.size()); }
};

// Per outer iteration: EM objective after the refit, encoder loss after its
// epochs, how many rows were trimmed, and how many EM iterations ran.
struct OuterIterationLog {
    int iteration = 0;
    double j = 0.0;
    double joint_loss = 0.0;
    int trimmed_count = 0;
    int em_iters = 0;
};

struct FitResult {
    Model model;
    std::vector<OuterIterationLog> log;
    // Scores of every training row under the final model, in row order.
    Eigen::VectorXd final_scores;
};

// Seed streams, so callers can reproduce individual stages of fit().
inline constexpr std::uint64_t kSeedStreamEncoder = 0x454e43ULL;
inline constexpr std::uint64_t kSeedStreamMixture = 0x4d4958ULL;
inline constexpr std::uint64_t kSeedStreamEpochs = 0x455023ULL;

// Resolved ablation switches.
struct EffectiveBehavior {
    DensityMode density = DensityMode::CauchyKernel;
    bool use_likelihood = true;
    double effective_l = 0.0;
};

// Validates that at most one ablation flag is set and resolves the switches.
// Throws DataError on a flag combination.
EffectiveBehavior apply_ablation(const TrainConfig& config);

// Alternating fit: standardize, init encoder and mixture, then per outer
// iteration (1) refresh the trimmed set from the current scores (all rows on
// the first pass), (2) train the encoder on the kept rows, (3) EM-refit the
// mixture on the kept embeddings (warm started), (4) score everything.
// Deterministic per seed.
FitResult fit(const Dataset& train, const TrainConfig& config);

// Frozen-parameter scoring of new rows: stored standardization, stored
// encoder, stored mixture and score mode.
Eigen::VectorXd score_inductive(const Model& model, const Dataset& test);

// As above with an explicit mode override.
Eigen::VectorXd score_inductive(const Model& model, const Dataset& test, ScoreMode mode);

// Embeddings of already-standardized rows under the model's encoder.
Eigen::MatrixXd embed(const Model& model, const Eigen::MatrixXd& standardized);

}  // namespace tmixad

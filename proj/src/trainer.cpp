#include "tmixad/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "tmixad/errors.hpp"
#include "tmixad/rng.hpp"

namespace tmixad {

namespace {

// Full batch for small sets, 256 otherwise. Encoder epochs get noticeably
// cheaper from batching only once GEMMs stop fitting in cache.
int auto_batch_size(int n) { return n <= 2048 ? n : 256; }

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t r = 0; r < idx.size(); ++r)
        out.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
    return out;
}

std::vector<int> all_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

}  // namespace

EffectiveBehavior apply_ablation(const TrainConfig& config) {
    int set = (config.gaussian_mixture ? 1 : 0) + (config.no_joint_likelihood ? 1 : 0) +
              (config.no_indicator ? 1 : 0);
    if (set > 1) throw DataError("at most one ablation flag may be set per run");
    EffectiveBehavior eff;
    eff.density = config.gaussian_mixture ? DensityMode::Gaussian : config.density_mode;
    eff.use_likelihood = !config.no_joint_likelihood;
    eff.effective_l = config.no_indicator ? 0.0 : config.l;
    return eff;
}

Eigen::MatrixXd embed(const Model& model, const Eigen::MatrixXd& standardized) {
    if (model.config.identity_embedding) return standardized;
    return forward(model.encoder, standardized).Z;
}

FitResult fit(const Dataset& train, const TrainConfig& config) {
    const int N = train.rows();
    const int D = train.cols();
    if (N == 0) throw DataError("fit: training set is empty");
    if (config.K < 1) throw DataError("fit: K must be at least 1");
    if (N < config.K) throw DataError("fit: fewer training rows than mixture components");
    if (!(config.l >= 0.0 && config.l < 1.0)) throw DataError("fit: l must be in [0, 1)");
    if (config.outer_iters < 1) throw DataError("fit: outer_iters must be at least 1");
    EffectiveBehavior eff = apply_ablation(config);

    FitResult res;
    res.model.config = config;

    auto [standardized, stats] = standardize_fit_apply(train, {});
    res.model.standardization = stats;
    const Eigen::MatrixXd& X = standardized[0].features;

    int latent = D;
    if (!config.identity_embedding) {
        latent = config.latent > 0 ? config.latent : std::min(D, 8);
        res.model.encoder =
            init_encoder(D, config.hidden, latent, derive_seed(config.seed, kSeedStreamEncoder));
    }

    AdamState adam = init_adam(res.model.encoder, config.lr);

    Eigen::MatrixXd Z = embed(res.model, X);
    res.model.mixture = init_mixture(Z, config.K, derive_seed(config.seed, kSeedStreamMixture),
                                     eff.density, config.u_unsquared);

    Eigen::VectorXd scores;  // scores from the end of the previous iteration
    for (int iter = 1; iter <= config.outer_iters; ++iter) {
        OuterIterationLog log_entry;
        log_entry.iteration = iter;

        // (1) trimmed set: first pass keeps everything, later passes drop the
        // floor(N*l) highest scores under the model as it stood after the
        // previous iteration
        std::vector<int> kept;
        if (iter == 1 || eff.effective_l == 0.0) {
            kept = all_indices(N);
        } else {
            OutlierSet sel = select_outliers(scores, eff.effective_l);
            kept = sel.kept;
            log_entry.trimmed_count = static_cast<int>(sel.removed.size());
        }
        if (kept.empty()) throw DataError("fit: trimming removed every training row");

        // (2) encoder update on the kept rows, mixture frozen
        if (config.identity_embedding || config.epochs == 0) {
            LossParts parts;
            if (config.identity_embedding) {
                Eigen::MatrixXd Zk = take_rows(X, kept);
                parts.likelihood_term =
                    eff.use_likelihood
                        ? -trimmed_log_likelihood(Zk, res.model.mixture,
                                                  all_indices(static_cast<int>(kept.size()))) /
                              static_cast<double>(kept.size())
                        : 0.0;
            } else {
                parts = joint_loss_parts(res.model.encoder, res.model.mixture,
                                         take_rows(X, kept), eff.use_likelihood);
            }
            log_entry.joint_loss = parts.total();
        } else {
            Eigen::MatrixXd Xk = take_rows(X, kept);
            log_entry.joint_loss = train_epochs(
                res.model.encoder, res.model.mixture, Xk, config.epochs,
                auto_batch_size(static_cast<int>(Xk.rows())), adam,
                derive_seed(config.seed, kSeedStreamEpochs, static_cast<std::uint64_t>(iter)),
                eff.use_likelihood);
        }

        // (3) EM refit on the kept embeddings, warm started from the current
        // mixture
        Z = embed(res.model, X);
        EmResult em = fit_em(Z, config.K, kept, res.model.mixture, config.em_tol,
                             config.em_max_iter);
        res.model.mixture = em.params;
        log_entry.j = em.final_j;
        log_entry.em_iters = em.iterations;

        // (4) score every training row with the refreshed model
        scores = score_all(Z, res.model.mixture, config.score_mode);
        res.log.push_back(log_entry);
    }
    res.final_scores = scores;
    return res;
}

Eigen::VectorXd score_inductive(const Model& model, const Dataset& test, ScoreMode mode) {
    if (test.cols() != model.input_dim())
        throw DataError("score: dataset has " + std::to_string(test.cols()) +
                        " feature columns, the model expects " +
                        std::to_string(model.input_dim()));
    Dataset standardized = apply_standardization(test, model.standardization);
    Eigen::MatrixXd Z = embed(model, standardized.features);
    return score_all(Z, model.mixture, mode);
}

Eigen::VectorXd score_inductive(const Model& model, const Dataset& test) {
    return score_inductive(model, test, model.config.score_mode);
}

}  // namespace tmixad

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

#include "tmixad/mixture.hpp"

namespace tmixad {

// Symmetric 2-layer MLP autoencoder. Hidden layers use ReLU; the latent and
// reconstruction layers are linear so both span all reals after z-scoring.
struct EncoderParams {
    Eigen::MatrixXd enc_w1;  // D x H
    Eigen::VectorXd enc_b1;  // H
    Eigen::MatrixXd enc_w2;  // H x d
    Eigen::VectorXd enc_b2;  // d
    Eigen::MatrixXd dec_w1;  // d x H
    Eigen::VectorXd dec_b1;  // H
    Eigen::MatrixXd dec_w2;  // H x D
    Eigen::VectorXd dec_b2;  // D

    int input_dim() const { return static_cast<int>(enc_w1.rows()); }
    int hidden_dim() const { return static_cast<int>(enc_w1.cols()); }
    int latent_dim() const { return static_cast<int>(enc_w2.cols()); }
};

// Same shapes as EncoderParams; one field per trainable tensor.
struct Gradients {
    Eigen::MatrixXd enc_w1;
    Eigen::VectorXd enc_b1;
    Eigen::MatrixXd enc_w2;
    Eigen::VectorXd enc_b2;
    Eigen::MatrixXd dec_w1;
    Eigen::VectorXd dec_b1;
    Eigen::MatrixXd dec_w2;
    Eigen::VectorXd dec_b2;
};

struct AdamState {
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step_count = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Glorot-uniform weights (each layer in +-sqrt(6/(fan_in+fan_out))), zero
// biases, deterministic fill order per seed.
EncoderParams init_encoder(int D, int H, int d, std::uint64_t seed);

// Adam moment buffers zeroed to the parameter shapes.
AdamState init_adam(const EncoderParams& params, double lr);

struct ForwardResult {
    Eigen::MatrixXd Z;      // B x d
    Eigen::MatrixXd X_hat;  // B x D
    double recon_loss = 0.0;  // mean over rows of squared L2 error
};

ForwardResult forward(const EncoderParams& params, const Eigen::MatrixXd& X);

// Training objective on the kept rows: mean negative log marginal likelihood
// of the embeddings plus mean squared reconstruction error. Both terms are
// per-row averages so their balance does not drift with the batch size.
struct LossParts {
    double likelihood_term = 0.0;
    double recon_term = 0.0;
    double total() const { return likelihood_term + recon_term; }
};

LossParts joint_loss_parts(const EncoderParams& params, const MixtureParams& mixture,
                           const Eigen::MatrixXd& X_kept, bool likelihood_enabled = true);

double joint_loss(const EncoderParams& params, const MixtureParams& mixture,
                  const Eigen::MatrixXd& X_kept, bool likelihood_enabled = true);

// Exact analytic gradient of joint_loss with the mixture held constant. The
// latent pull per row is sum_k tau_ik * u_ik * (z_i - mu_k) / scale_k with u
// taken from the density actually being differentiated (the u_unsquared EM
// switch never enters here).
std::pair<Gradients, double> joint_loss_gradient(const EncoderParams& params,
                                                 const MixtureParams& mixture,
                                                 const Eigen::MatrixXd& X_kept,
                                                 bool likelihood_enabled = true);

// One bias-corrected Adam update, in place. Bit-reproducible for identical
// inputs.
void adam_step(EncoderParams& params, const Gradients& grads, AdamState& state);

// `epochs` passes of minibatch Adam on the joint loss, batch order shuffled
// deterministically per (seed, epoch). Returns the final full-data loss;
// epochs = 0 leaves the parameters untouched and just evaluates it.
double train_epochs(EncoderParams& params, const MixtureParams& mixture,
                    const Eigen::MatrixXd& X_kept, int epochs, int batch_size,
                    AdamState& state, std::uint64_t seed, bool likelihood_enabled = true);

}  // namespace tmixad

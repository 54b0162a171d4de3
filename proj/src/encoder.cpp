#include "tmixad/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tmixad/errors.hpp"
#include "tmixad/rng.hpp"

namespace tmixad {

namespace {

void fill_glorot(Eigen::MatrixXd& w, std::mt19937_64& gen) {
    double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            w(r, c) = (2.0 * uniform01(gen) - 1.0) * bound;
}

// Scale factor of the density derivative per mode. This is the u that makes
// d(-log p)/dz = sum_k tau_k * u_k * (z - mu_k) / scale_k hold exactly.
double gradient_u(double d2, DensityMode mode, int d) {
    switch (mode) {
        case DensityMode::CauchyKernel:
            return 2.0 / (1.0 + d2);
        case DensityMode::StudentT:
            return (1.0 + d) / (1.0 + d2);
        case DensityMode::Gaussian:
            return 1.0;
    }
    return 1.0;
}

// Adds the likelihood pull for every row of Z into dZ, scaled by 1/n, and
// returns sum_i -log p(z_i).
double accumulate_likelihood(const Eigen::MatrixXd& Z, const MixtureParams& mix,
                             Eigen::MatrixXd* dZ) {
    const int N = static_cast<int>(Z.rows());
    const int K = mix.components();
    const int d = mix.latent_dim();
    const double inv_n = 1.0 / static_cast<double>(N);

    double neg_log = 0.0;
    std::vector<double> force(K), d2(K);
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd z = Z.row(i).transpose();
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            d2[k] = mahalanobis_sq(z, mix.prototypes.row(k).transpose(),
                                   mix.scales.row(k).transpose());
            force[k] = component_force(z, k, mix);
            total += force[k];
        }
        neg_log -= std::log(std::max(total, kLikelihoodFloor));
        if (dZ == nullptr) continue;
        if (total <= kLikelihoodFloor) continue;  // clamped region is flat
        for (int k = 0; k < K; ++k) {
            double w = (force[k] / total) * gradient_u(d2[k], mix.density_mode, d) * inv_n;
            for (int j = 0; j < d; ++j)
                (*dZ)(i, j) += w * (Z(i, j) - mix.prototypes(k, j)) / mix.scales(k, j);
        }
    }
    return neg_log;
}

struct ForwardCache {
    Eigen::MatrixXd A1, H1, Z, A2, H2, X_hat;
};

ForwardCache run_forward(const EncoderParams& p, const Eigen::MatrixXd& X) {
    if (X.cols() != p.input_dim()) throw DataError("forward: feature dimension mismatch");
    ForwardCache c;
    c.A1 = (X * p.enc_w1).rowwise() + p.enc_b1.transpose();
    c.H1 = c.A1.cwiseMax(0.0);
    c.Z = (c.H1 * p.enc_w2).rowwise() + p.enc_b2.transpose();
    c.A2 = (c.Z * p.dec_w1).rowwise() + p.dec_b1.transpose();
    c.H2 = c.A2.cwiseMax(0.0);
    c.X_hat = (c.H2 * p.dec_w2).rowwise() + p.dec_b2.transpose();
    return c;
}

Gradients zeros_like(const EncoderParams& p) {
    Gradients g;
    g.enc_w1 = Eigen::MatrixXd::Zero(p.enc_w1.rows(), p.enc_w1.cols());
    g.enc_b1 = Eigen::VectorXd::Zero(p.enc_b1.size());
    g.enc_w2 = Eigen::MatrixXd::Zero(p.enc_w2.rows(), p.enc_w2.cols());
    g.enc_b2 = Eigen::VectorXd::Zero(p.enc_b2.size());
    g.dec_w1 = Eigen::MatrixXd::Zero(p.dec_w1.rows(), p.dec_w1.cols());
    g.dec_b1 = Eigen::VectorXd::Zero(p.dec_b1.size());
    g.dec_w2 = Eigen::MatrixXd::Zero(p.dec_w2.rows(), p.dec_w2.cols());
    g.dec_b2 = Eigen::VectorXd::Zero(p.dec_b2.size());
    return g;
}

}  // namespace

EncoderParams init_encoder(int D, int H, int d, std::uint64_t seed) {
    if (D < 1 || H < 1 || d < 1) throw DataError("init_encoder: dimensions must be at least 1");
    std::mt19937_64 gen(seed);
    EncoderParams p;
    p.enc_w1.resize(D, H);
    p.enc_w2.resize(H, d);
    p.dec_w1.resize(d, H);
    p.dec_w2.resize(H, D);
    fill_glorot(p.enc_w1, gen);
    fill_glorot(p.enc_w2, gen);
    fill_glorot(p.dec_w1, gen);
    fill_glorot(p.dec_w2, gen);
    p.enc_b1 = Eigen::VectorXd::Zero(H);
    p.enc_b2 = Eigen::VectorXd::Zero(d);
    p.dec_b1 = Eigen::VectorXd::Zero(H);
    p.dec_b2 = Eigen::VectorXd::Zero(D);
    return p;
}

AdamState init_adam(const EncoderParams& params, double lr) {
    AdamState s;
    s.first_moment = zeros_like(params);
    s.second_moment = zeros_like(params);
    s.lr = lr;
    return s;
}

ForwardResult forward(const EncoderParams& params, const Eigen::MatrixXd& X) {
    ForwardCache c = run_forward(params, X);
    ForwardResult r;
    r.recon_loss = (X - c.X_hat).squaredNorm() / static_cast<double>(X.rows());
    r.Z = std::move(c.Z);
    r.X_hat = std::move(c.X_hat);
    return r;
}

LossParts joint_loss_parts(const EncoderParams& params, const MixtureParams& mixture,
                           const Eigen::MatrixXd& X_kept, bool likelihood_enabled) {
    if (likelihood_enabled && mixture.latent_dim() != params.latent_dim())
        throw DataError("joint_loss: mixture latent dimension mismatch");
    ForwardCache c = run_forward(params, X_kept);
    const double n = static_cast<double>(X_kept.rows());
    LossParts parts;
    parts.recon_term = (X_kept - c.X_hat).squaredNorm() / n;
    if (likelihood_enabled)
        parts.likelihood_term = accumulate_likelihood(c.Z, mixture, nullptr) / n;
    return parts;
}

double joint_loss(const EncoderParams& params, const MixtureParams& mixture,
                  const Eigen::MatrixXd& X_kept, bool likelihood_enabled) {
    return joint_loss_parts(params, mixture, X_kept, likelihood_enabled).total();
}

std::pair<Gradients, double> joint_loss_gradient(const EncoderParams& params,
                                                 const MixtureParams& mixture,
                                                 const Eigen::MatrixXd& X_kept,
                                                 bool likelihood_enabled) {
    if (likelihood_enabled && mixture.latent_dim() != params.latent_dim())
        throw DataError("joint_loss_gradient: mixture latent dimension mismatch");
    const double n = static_cast<double>(X_kept.rows());
    ForwardCache c = run_forward(params, X_kept);

    Gradients g = zeros_like(params);
    double loss = (X_kept - c.X_hat).squaredNorm() / n;

    // decoder side, driven by the mean squared error
    Eigen::MatrixXd dX_hat = (2.0 / n) * (c.X_hat - X_kept);
    g.dec_w2.noalias() = c.H2.transpose() * dX_hat;
    g.dec_b2 = dX_hat.colwise().sum().transpose();
    Eigen::MatrixXd dA2 =
        (dX_hat * params.dec_w2.transpose()).cwiseProduct((c.A2.array() > 0.0).cast<double>().matrix());
    g.dec_w1.noalias() = c.Z.transpose() * dA2;
    g.dec_b1 = dA2.colwise().sum().transpose();

    Eigen::MatrixXd dZ = dA2 * params.dec_w1.transpose();
    if (likelihood_enabled) loss += accumulate_likelihood(c.Z, mixture, &dZ) / n;

    // encoder side, driven by reconstruction and the latent pull together
    g.enc_w2.noalias() = c.H1.transpose() * dZ;
    g.enc_b2 = dZ.colwise().sum().transpose();
    Eigen::MatrixXd dA1 =
        (dZ * params.enc_w2.transpose()).cwiseProduct((c.A1.array() > 0.0).cast<double>().matrix());
    g.enc_w1.noalias() = X_kept.transpose() * dA1;
    g.enc_b1 = dA1.colwise().sum().transpose();
    return {std::move(g), loss};
}

namespace {

void adam_update_tensor(Eigen::Ref<Eigen::MatrixXd> theta, const Eigen::MatrixXd& g,
                        Eigen::MatrixXd& m, Eigen::MatrixXd& v, const AdamState& s,
                        double bc1, double bc2) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    Eigen::MatrixXd m_hat = m / bc1;
    Eigen::MatrixXd v_hat = v / bc2;
    theta -= s.lr * (m_hat.array() / (v_hat.array().sqrt() + s.epsilon)).matrix();
}

void adam_update_vector(Eigen::Ref<Eigen::VectorXd> theta, const Eigen::VectorXd& g,
                        Eigen::VectorXd& m, Eigen::VectorXd& v, const AdamState& s,
                        double bc1, double bc2) {
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseProduct(g);
    Eigen::VectorXd m_hat = m / bc1;
    Eigen::VectorXd v_hat = v / bc2;
    theta -= s.lr * (m_hat.array() / (v_hat.array().sqrt() + s.epsilon)).matrix();
}

}  // namespace

void adam_step(EncoderParams& params, const Gradients& grads, AdamState& state) {
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    adam_update_tensor(params.enc_w1, grads.enc_w1, state.first_moment.enc_w1,
                       state.second_moment.enc_w1, state, bc1, bc2);
    adam_update_vector(params.enc_b1, grads.enc_b1, state.first_moment.enc_b1,
                       state.second_moment.enc_b1, state, bc1, bc2);
    adam_update_tensor(params.enc_w2, grads.enc_w2, state.first_moment.enc_w2,
                       state.second_moment.enc_w2, state, bc1, bc2);
    adam_update_vector(params.enc_b2, grads.enc_b2, state.first_moment.enc_b2,
                       state.second_moment.enc_b2, state, bc1, bc2);
    adam_update_tensor(params.dec_w1, grads.dec_w1, state.first_moment.dec_w1,
                       state.second_moment.dec_w1, state, bc1, bc2);
    adam_update_vector(params.dec_b1, grads.dec_b1, state.first_moment.dec_b1,
                       state.second_moment.dec_b1, state, bc1, bc2);
    adam_update_tensor(params.dec_w2, grads.dec_w2, state.first_moment.dec_w2,
                       state.second_moment.dec_w2, state, bc1, bc2);
    adam_update_vector(params.dec_b2, grads.dec_b2, state.first_moment.dec_b2,
                       state.second_moment.dec_b2, state, bc1, bc2);
}

double train_epochs(EncoderParams& params, const MixtureParams& mixture,
                    const Eigen::MatrixXd& X_kept, int epochs, int batch_size,
                    AdamState& state, std::uint64_t seed, bool likelihood_enabled) {
    const int n = static_cast<int>(X_kept.rows());
    if (n == 0) throw DataError("train_epochs: no rows to train on");
    if (batch_size <= 0) throw DataError("train_epochs: batch_size must be positive");

    std::vector<int> order(n);
    for (int e = 0; e < epochs; ++e) {
        for (int i = 0; i < n; ++i) order[i] = i;
        std::mt19937_64 gen(derive_seed(seed, 0x45504f43ULL, static_cast<std::uint64_t>(e)));
        shuffle_indices(order, gen);
        for (int start = 0; start < n; start += batch_size) {
            int count = std::min(batch_size, n - start);
            Eigen::MatrixXd batch(count, X_kept.cols());
            for (int r = 0; r < count; ++r) batch.row(r) = X_kept.row(order[start + r]);
            auto [g, loss] = joint_loss_gradient(params, mixture, batch, likelihood_enabled);
            (void)loss;
            adam_step(params, g, state);
        }
    }
    return joint_loss(params, mixture, X_kept, likelihood_enabled);
}

}  // namespace tmixad

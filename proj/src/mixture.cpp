#include "tmixad/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmixad/errors.hpp"
#include "tmixad/rng.hpp"

namespace tmixad {

namespace {

const double kPi = 3.141592653589793238462643383279;

// log of the density normalizer in front of |Sigma|^-1/2, per mode.
double log_normalizer(DensityMode mode, int d) {
    switch (mode) {
        case DensityMode::CauchyKernel:
            return -std::log(kPi);
        case DensityMode::StudentT:
            // Gamma((1+d)/2) / (Gamma(1/2) * pi^(d/2))
            return std::lgamma(0.5 * (1.0 + d)) - std::lgamma(0.5) - 0.5 * d * std::log(kPi);
        case DensityMode::Gaussian:
            return -0.5 * d * std::log(2.0 * kPi);
    }
    return 0.0;
}

double force_from_d2(double d2, double weight, double sqrt_det_inv, double norm,
                     DensityMode mode, int d) {
    switch (mode) {
        case DensityMode::CauchyKernel:
            return weight * norm * sqrt_det_inv / (1.0 + d2);
        case DensityMode::StudentT:
            return weight * norm * sqrt_det_inv * std::pow(1.0 + d2, -0.5 * (1.0 + d));
        case DensityMode::Gaussian:
            return weight * norm * sqrt_det_inv * std::exp(-0.5 * d2);
    }
    return 0.0;
}

double u_from_d2(double d2, DensityMode mode, bool u_unsquared, int d) {
    switch (mode) {
        case DensityMode::CauchyKernel:
            return u_unsquared ? 2.0 / (1.0 + std::sqrt(d2)) : 2.0 / (1.0 + d2);
        case DensityMode::StudentT:
            return (1.0 + d) / (1.0 + d2);
        case DensityMode::Gaussian:
            return 1.0;
    }
    return 1.0;
}

// Per-component constants reused across rows: 1/sqrt(prod scales) and the
// mode normalizer (not in log space, these stay well within double range for
// floored scales and small d).
struct ComponentConsts {
    Eigen::VectorXd sqrt_det_inv;  // K
    double norm = 0.0;
};

ComponentConsts component_consts(const MixtureParams& p) {
    const int K = p.components();
    ComponentConsts c;
    c.sqrt_det_inv.resize(K);
    for (int k = 0; k < K; ++k) {
        double log_det = 0.0;
        for (int j = 0; j < p.latent_dim(); ++j) {
            double s = p.scales(k, j);
            if (!(s > 0.0)) throw NumericError("mixture scale entry must be positive");
            log_det += std::log(s);
        }
        c.sqrt_det_inv(k) = std::exp(-0.5 * log_det);
    }
    c.norm = std::exp(log_normalizer(p.density_mode, p.latent_dim()));
    return c;
}

double maha_row(const Eigen::MatrixXd& Z, int i, const MixtureParams& p, int k) {
    double acc = 0.0;
    for (int j = 0; j < p.latent_dim(); ++j) {
        double diff = Z(i, j) - p.prototypes(k, j);
        acc += diff * diff / p.scales(k, j);
    }
    return acc;
}

}  // namespace

double mahalanobis_sq(const Eigen::VectorXd& z, const Eigen::VectorXd& prototype,
                      const Eigen::VectorXd& scale) {
    if (z.size() != prototype.size() || z.size() != scale.size())
        throw DataError("mahalanobis_sq: vector sizes differ");
    double acc = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (!(scale(j) > 0.0)) throw NumericError("mahalanobis_sq: nonpositive scale entry");
        double diff = z(j) - prototype(j);
        acc += diff * diff / scale(j);
    }
    return acc;
}

double component_force(const Eigen::VectorXd& z, int k, const MixtureParams& params) {
    if (k < 0 || k >= params.components()) throw DataError("component_force: bad component index");
    double d2 = mahalanobis_sq(z, params.prototypes.row(k).transpose(),
                               params.scales.row(k).transpose());
    double log_det = params.scales.row(k).array().log().sum();
    return force_from_d2(d2, params.weights(k), std::exp(-0.5 * log_det),
                         std::exp(log_normalizer(params.density_mode, params.latent_dim())),
                         params.density_mode, params.latent_dim());
}

double marginal_likelihood(const Eigen::VectorXd& z, const MixtureParams& params) {
    double acc = 0.0;
    for (int k = 0; k < params.components(); ++k) acc += component_force(z, k, params);
    return acc;
}

std::pair<Responsibilities, ScaleFactors> e_step(const Eigen::MatrixXd& Z,
                                                 const MixtureParams& params) {
    const int N = static_cast<int>(Z.rows());
    const int K = params.components();
    const int d = params.latent_dim();
    if (Z.cols() != d) throw DataError("e_step: latent dimension mismatch");

    ComponentConsts consts = component_consts(params);
    Responsibilities resp;
    ScaleFactors sf;
    resp.tau.resize(N, K);
    sf.u.resize(N, K);

    for (int i = 0; i < N; ++i) {
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            double d2 = maha_row(Z, i, params, k);
            double f = force_from_d2(d2, params.weights(k), consts.sqrt_det_inv(k),
                                     consts.norm, params.density_mode, d);
            resp.tau(i, k) = f;
            sf.u(i, k) = u_from_d2(d2, params.density_mode, params.u_unsquared, d);
            total += f;
        }
        if (total > 0.0) {
            for (int k = 0; k < K; ++k) resp.tau(i, k) /= total;
        } else {
            // Gaussian ablation can underflow every component at once; fall
            // back to a uniform posterior so the row still sums to 1.
            for (int k = 0; k < K; ++k) resp.tau(i, k) = 1.0 / K;
        }
    }
    return {std::move(resp), std::move(sf)};
}

MixtureParams m_step(const Eigen::MatrixXd& Z, const Responsibilities& resp,
                     const ScaleFactors& sf, const std::vector<int>& kept,
                     const MixtureParams& current) {
    const int K = current.components();
    const int d = current.latent_dim();
    if (kept.empty()) throw DataError("m_step: kept set is empty");
    if (resp.tau.rows() != Z.rows() || sf.u.rows() != Z.rows())
        throw DataError("m_step: responsibility rows do not match Z");
    const double nk = static_cast<double>(kept.size());

    MixtureParams out;
    out.density_mode = current.density_mode;
    out.u_unsquared = current.u_unsquared;
    out.weights.resize(K);
    out.prototypes.resize(K, d);
    out.scales.resize(K, d);

    std::vector<int> starved;
    for (int k = 0; k < K; ++k) {
        double sum_tau = 0.0;
        double sum_tu = 0.0;
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        for (int i : kept) {
            double tu = resp.tau(i, k) * sf.u(i, k);
            sum_tau += resp.tau(i, k);
            sum_tu += tu;
            for (int j = 0; j < d; ++j) mu(j) += tu * Z(i, j);
        }
        if (sum_tau < 1e-12) {
            starved.push_back(k);
            continue;  // filled in below
        }
        mu /= sum_tu;
        Eigen::VectorXd sig = Eigen::VectorXd::Zero(d);
        for (int i : kept) {
            double tu = resp.tau(i, k) * sf.u(i, k);
            for (int j = 0; j < d; ++j) {
                double diff = Z(i, j) - mu(j);
                sig(j) += tu * diff * diff;
            }
        }
        out.weights(k) = sum_tau / nk;
        out.prototypes.row(k) = mu.transpose();
        for (int j = 0; j < d; ++j) out.scales(k, j) = std::max(sig(j) / sum_tau, kScaleFloor);
    }

    if (!starved.empty()) {
        // Re-seed each starved component at a distinct low-likelihood kept
        // point, judged under the params that produced tau and u.
        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(kept.size());
        for (int i : kept)
            ranked.emplace_back(marginal_likelihood(Z.row(i).transpose(), current), i);
        std::sort(ranked.begin(), ranked.end());

        Eigen::VectorXd global_var = Eigen::VectorXd::Zero(d);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (int i : kept) mean += Z.row(i).transpose();
        mean /= nk;
        for (int i : kept) {
            Eigen::VectorXd diff = Z.row(i).transpose() - mean;
            global_var += diff.cwiseProduct(diff);
        }
        global_var /= nk;

        std::size_t next = 0;
        for (int k : starved) {
            int idx = ranked[std::min(next, ranked.size() - 1)].second;
            ++next;
            out.prototypes.row(k) = Z.row(idx);
            for (int j = 0; j < d; ++j) out.scales(k, j) = std::max(global_var(j), kScaleFloor);
            out.weights(k) = 1.0 / nk;
        }
        out.weights /= out.weights.sum();
    }
    return out;
}

double trimmed_log_likelihood(const Eigen::MatrixXd& Z, const MixtureParams& params,
                              const std::vector<int>& kept) {
    const int K = params.components();
    const int d = params.latent_dim();
    if (Z.cols() != d) throw DataError("trimmed_log_likelihood: latent dimension mismatch");
    ComponentConsts consts = component_consts(params);
    double acc = 0.0;
    for (int i : kept) {
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            double d2 = maha_row(Z, i, params, k);
            total += force_from_d2(d2, params.weights(k), consts.sqrt_det_inv(k),
                                   consts.norm, params.density_mode, d);
        }
        acc += std::log(std::max(total, kLikelihoodFloor));
    }
    return acc;
}

MixtureParams init_mixture(const Eigen::MatrixXd& Z, int K, std::uint64_t seed,
                           DensityMode mode, bool u_unsquared) {
    const int N = static_cast<int>(Z.rows());
    const int d = static_cast<int>(Z.cols());
    if (K < 1) throw DataError("init_mixture: K must be at least 1");
    if (N < K) throw DataError("init_mixture: fewer rows than components");

    std::mt19937_64 gen(seed);
    std::vector<int> chosen;
    chosen.reserve(K);
    std::vector<bool> is_chosen(N, false);
    int first = static_cast<int>(uniform_index(gen, N));
    chosen.push_back(first);
    is_chosen[first] = true;

    // dist2[i]: squared distance to the nearest chosen prototype.
    Eigen::VectorXd dist2(N);
    for (int i = 0; i < N; ++i) dist2(i) = (Z.row(i) - Z.row(first)).squaredNorm();

    while (static_cast<int>(chosen.size()) < K) {
        double total = dist2.sum();
        int pick = -1;
        if (total > 0.0) {
            double r = uniform01(gen) * total;
            double acc = 0.0;
            for (int i = 0; i < N; ++i) {
                if (dist2(i) <= 0.0) continue;
                acc += dist2(i);
                pick = i;
                if (acc > r) break;
            }
        }
        if (pick < 0) {
            // all remaining weight is zero (duplicated points); take the
            // first index not yet chosen so seeding still terminates
            for (int i = 0; i < N; ++i) {
                if (!is_chosen[i]) { pick = i; break; }
            }
        }
        chosen.push_back(pick);
        is_chosen[pick] = true;
        for (int i = 0; i < N; ++i)
            dist2(i) = std::min(dist2(i), (Z.row(i) - Z.row(pick)).squaredNorm());
    }

    MixtureParams p;
    p.density_mode = mode;
    p.u_unsquared = u_unsquared;
    p.weights = Eigen::VectorXd::Constant(K, 1.0 / K);
    p.prototypes.resize(K, d);
    for (int k = 0; k < K; ++k) p.prototypes.row(k) = Z.row(chosen[k]);

    Eigen::VectorXd mean = Z.colwise().mean();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < N; ++i) {
        Eigen::VectorXd diff = Z.row(i).transpose() - mean;
        var += diff.cwiseProduct(diff);
    }
    var /= static_cast<double>(N);
    p.scales.resize(K, d);
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < d; ++j) p.scales(k, j) = std::max(var(j), kScaleFloor);
    return p;
}

EmResult fit_em(const Eigen::MatrixXd& Z, int K, const std::vector<int>& kept,
                const MixtureParams& init, double tol, int max_iter) {
    if (K != init.components()) throw DataError("fit_em: K does not match init params");
    if (kept.empty()) throw DataError("fit_em: kept set is empty");

    EmResult res;
    res.params = init;
    double j_old = trimmed_log_likelihood(Z, res.params, kept);
    res.j_history.push_back(j_old);

    while (res.iterations < max_iter) {
        auto [resp, sf] = e_step(Z, res.params);
        res.params = m_step(Z, resp, sf, kept, res.params);
        double j = trimmed_log_likelihood(Z, res.params, kept);
        ++res.iterations;
        res.j_history.push_back(j);
        if (std::abs(j - j_old) <= tol) break;
        j_old = j;
    }
    res.final_j = res.j_history.back();
    return res;
}

}  // namespace tmixad

#pragma once

// Gibbs sampler checks shared by the unit tests and the acceptance binary.

#include "fdrreg/diagnostics.hpp"
#include "fdrreg/gibbs.hpp"

#include <array>
#include <cmath>
#include <random>
#include <span>
#include <vector>

namespace oracles {

using namespace fdrreg;

inline Eigen::MatrixXd intercept_and_x(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = u(rng);
    }
    return X;
}

inline double mcse2(std::span<const double> chain) { return sample_variance(chain) / effective_sample_size(chain); }

// Geweke (2004) joint-distribution test on an n = 10, d = 2, K = 1 toy with
// informative hyperparameters. Returns the z-scores of beta_0, beta_1, mu_1,
// tau2_1 and sum(h) between the marginal-conditional and successive-conditional
// simulators.
inline std::array<double, 5> geweke_toy(std::uint64_t seed, int iid_draws, int sweeps) {
    constexpr int n = 10;
    constexpr std::size_t kStats = 5;
    const Eigen::MatrixXd X = intercept_and_x(n, seed);
    const NullModel null{};
    GibbsConfig cfg;
    cfg.B0 = Eigen::MatrixXd::Identity(2, 2);
    cfg.v_mu = 1.0;
    cfg.a = 6.0;
    cfg.b = 6.0;
    const GibbsSampler sampler(X, null, cfg);

    Rng rng(derive_seed(seed, 1));
    std::normal_distribution<double> norm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw_prior = [&](GibbsState& s) {
        s.beta = Eigen::VectorXd(2);
        s.beta << norm(rng), norm(rng);
        std::gamma_distribution<double> g(0.5 * cfg.a, 2.0 / cfg.b);
        s.mixture = GaussianMixturePrior{{1.0}, {std::sqrt(cfg.v_mu) * norm(rng)}, {1.0 / g(rng)}};
    };
    auto draw_latent = [&](GibbsState& s) {
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            s.h[k] = unif(rng) < logistic(X.row(i).dot(s.beta)) ? 1 : 0;
            s.theta[k] = s.h[k] ? s.mixture.mean[0] + std::sqrt(s.mixture.variance[0]) * norm(rng) : 0.0;
            s.label[k] = s.h[k] ? 0 : -1;
        }
    };
    auto draw_z = [&](const GibbsState& s, std::vector<double>& z) {
        for (int i = 0; i < n; ++i) {
            z[static_cast<std::size_t>(i)] = null.mu + s.theta[static_cast<std::size_t>(i)] + null.sigma() * norm(rng);
        }
    };
    auto stats = [](const GibbsState& s) {
        double nh = 0;
        for (int v : s.h) nh += v;
        return std::array<double, kStats>{s.beta(0), s.beta(1), s.mixture.mean[0], s.mixture.variance[0], nh};
    };

    GibbsState st;
    st.h.assign(n, 0);
    st.label.assign(n, -1);
    st.theta.assign(n, 0.0);
    st.omega.assign(n, 0.25);
    st.w.assign(n, 0.0);
    std::vector<double> z(n);

    std::array<std::vector<double>, kStats> mc, sc;
    for (int t = 0; t < iid_draws; ++t) {
        draw_prior(st);
        draw_latent(st);
        const auto s = stats(st);
        for (std::size_t j = 0; j < kStats; ++j) mc[j].push_back(s[j]);
    }
    draw_prior(st);
    draw_latent(st);
    draw_z(st, z);
    for (int t = 0; t < sweeps; ++t) {
        sampler.sweep(z, st, rng);
        draw_z(st, z);
        const auto s = stats(st);
        for (std::size_t j = 0; j < kStats; ++j) sc[j].push_back(s[j]);
    }
    std::array<double, kStats> out{};
    for (std::size_t j = 0; j < kStats; ++j) {
        const double se2 = mcse2(sc[j]) + sample_variance(mc[j]) / static_cast<double>(mc[j].size());
        out[j] = (sample_mean(sc[j]) - sample_mean(mc[j])) / std::sqrt(se2);
    }
    return out;
}

struct MetropolisComparison {
    std::array<double, 2> beta_z{};  // Gibbs minus Metropolis posterior mean, in MC standard errors
    double max_w_diff = 0.0;
    double acceptance = 0.0;
};

// n = 30 toy with the mixture held fixed. The Metropolis chain proposes from
// the beta prior, so its acceptance ratio is the marginal likelihood ratio.
inline MetropolisComparison metropolis_toy(std::uint64_t seed, int steps, int gibbs_iterations) {
    constexpr int n = 30;
    const Eigen::MatrixXd X = intercept_and_x(n, seed);
    const NullModel null{};
    const GaussianMixturePrior mix{{0.6, 0.4}, {2.5, -2.0}, {1.0, 0.5}};
    const double prior_var = 4.0;
    Rng rng(derive_seed(seed, 1));
    std::normal_distribution<double> norm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> z(n), f0(n), f1(n);
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const bool sig = unif(rng) < logistic(-0.5 + 1.5 * X(i, 1));
        z[k] = (sig ? mix.sample(rng) : 0.0) + norm(rng);
        f0[k] = null.pdf(z[k]);
        f1[k] = mix.predictive_pdf(z[k], null);
    }
    auto loglik = [&](const Eigen::VectorXd& beta) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double c = logistic(X.row(i).dot(beta));
            s += std::log(c * f1[k] + (1 - c) * f0[k]);
        }
        return s;
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
    double ll = loglik(beta);
    std::array<std::vector<double>, 2> mh;
    std::vector<double> w_mean(n, 0.0);
    long accepted = 0, w_count = 0;
    for (int t = 0; t < steps; ++t) {
        Eigen::VectorXd prop(2);
        prop << std::sqrt(prior_var) * norm(rng), std::sqrt(prior_var) * norm(rng);
        const double llp = loglik(prop);
        if (std::log(unif(rng)) < llp - ll) {
            beta = prop;
            ll = llp;
            ++accepted;
        }
        mh[0].push_back(beta(0));
        mh[1].push_back(beta(1));
        if (t % 10 == 0) {
            ++w_count;
            for (int i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                w_mean[k] += posterior_probability(logistic(X.row(i).dot(beta)), f1[k], f0[k]);
            }
        }
    }
    for (double& v : w_mean) v /= static_cast<double>(w_count);

    GibbsConfig cfg;
    cfg.iterations = gibbs_iterations;
    cfg.burn_in = 1000;
    cfg.seed = derive_seed(seed, 2);
    cfg.beta_prior_variance = prior_var;
    cfg.update_mixture = false;
    const auto fb = gibbs_fit(z, X, null, cfg, mix);

    MetropolisComparison out;
    out.acceptance = static_cast<double>(accepted) / steps;
    for (Eigen::Index j = 0; j < 2; ++j) {
        const Eigen::VectorXd col = fb.beta_draws.col(j);
        const std::span<const double> g(col.data(), static_cast<std::size_t>(col.size()));
        const auto& m = mh[static_cast<std::size_t>(j)];
        out.beta_z[static_cast<std::size_t>(j)] = (sample_mean(g) - sample_mean(m)) / std::sqrt(mcse2(g) + mcse2(m));
    }
    for (std::size_t i = 0; i < w_mean.size(); ++i) out.max_w_diff = std::max(out.max_w_diff, std::abs(fb.w[i] - w_mean[i]));
    return out;
}

}  // namespace oracles

#pragma once

// Fully Bayesian FDR regression: Gibbs sampling with Polya-Gamma augmentation
// for the logistic prior and a K-component Gaussian mixture for the signals.

#include "fdrreg/deconvolution.hpp"
#include "fdrreg/model_core.hpp"
#include "fdrreg/numerics.hpp"
#include "fdrreg/polya_gamma.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace fdrreg {

struct GibbsConfig {
    int iterations = 10000;  // total sweeps, burn-in included
    int burn_in = 2000;
    int thin = 1;
    std::uint64_t seed = 0;

    // beta ~ N(b0, B0). Empty b0 means 0, empty B0 means beta_prior_variance * I.
    Eigen::VectorXd b0;
    Eigen::MatrixXd B0;
    double beta_prior_variance = 100.0;
    double v_mu = 100.0;  // mu_k ~ N(0, v_mu)
    double a = 1.0;       // tau2_k ~ IG(a/2, b/2)
    double b = 1.0;
    double alpha = 1.0;   // symmetric Dirichlet on eta

    int components = 0;  // 0 selects K by AIC
    int max_components = 5;
    bool update_mixture = true;  // false holds the mixture at its initial value

    void validate() const;
};

struct GibbsState {
    Eigen::VectorXd beta;
    std::vector<int> h;
    std::vector<int> label;      // component of each signal, -1 for nulls
    std::vector<double> theta;   // signal effect (offset from the null mean), 0 for nulls
    std::vector<double> omega;
    std::vector<double> w;       // P(h_i = 1 | beta, mixture) from the latest sweep
    GaussianMixturePrior mixture;
};

class GibbsSampler {
public:
    GibbsSampler(const Eigen::MatrixXd& Xd, const NullModel& null, const GibbsConfig& config);

    // Mixture at `prior`, beta with intercept logit(c0), h drawn from the implied w.
    GibbsState initial_state(std::span<const double> z, const GaussianMixturePrior& prior, double c0, Rng& rng) const;

    // One full sweep: (h, label, theta) | beta, mixture; omega, beta | h; mixture | theta, labels.
    void sweep(std::span<const double> z, GibbsState& state, Rng& rng) const;

    // omega ~ PG(1, x'beta), then beta ~ N(m, V). Returns the new beta; omega is overwritten.
    Eigen::VectorXd sample_beta(std::span<const int> h, const Eigen::VectorXd& beta, std::vector<double>& omega,
                                Rng& rng) const;

    void sample_mixture(GibbsState& state, Rng& rng) const;

    const Eigen::VectorXd& prior_mean() const { return b0_; }
    const Eigen::MatrixXd& prior_precision() const { return B0_inv_; }

private:
    Eigen::MatrixXd Xd_;
    NullModel null_;
    GibbsConfig config_;
    Eigen::VectorXd b0_;
    Eigen::MatrixXd B0_inv_;
    Eigen::VectorXd B0_inv_b0_;
    PolyaGammaSampler pg_;
};

struct PosteriorSamples {
    Eigen::MatrixXd beta_draws;                  // kept draws x d
    std::vector<double> w;                       // Rao-Blackwellized posterior mean of h_i
    std::vector<double> inclusion_frequency;     // raw mean of the h_i draws
    std::vector<GaussianMixturePrior> mixture_draws;
    Eigen::VectorXd beta_mean;
    Eigen::VectorXd beta_ess;
    int components = 0;
    int kept = 0;
    double acceptance = 1.0;

    std::vector<double> localfdr() const;
};

// Initializes from the deconvolution EM at the selected K unless `initial` is given.
PosteriorSamples gibbs_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null,
                           const GibbsConfig& config, const std::optional<GaussianMixturePrior>& initial = std::nullopt);

struct EbFbComparison {
    double mean_abs_diff = 0.0;
    double max_abs_diff = 0.0;
    double jaccard = 1.0;  // two empty discovery sets count as identical
    std::size_t eb_discoveries = 0;
    std::size_t fb_discoveries = 0;
};

EbFbComparison compare_eb_fb(std::span<const double> w_eb, std::span<const double> w_fb, double q = 0.10);
EbFbComparison compare_eb_fb(const RegressionFit& eb, const PosteriorSamples& fb, double q = 0.10);

double jaccard_index(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace fdrreg

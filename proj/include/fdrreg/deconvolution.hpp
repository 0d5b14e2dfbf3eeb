#pragma once

// Gaussian deconvolution mixtures z ~ sum_k eta_k N(mu + m_k, sigma2 + tau2_k)
// fit by EM, and AIC selection of the number of components.

#include "fdrreg/model_core.hpp"
#include "fdrreg/numerics.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdrreg {

// K-component Gaussian mixture for the non-null effect sizes theta.
struct GaussianMixturePrior {
    std::vector<double> weight;
    std::vector<double> mean;
    std::vector<double> variance;

    std::size_t size() const { return weight.size(); }
    void validate() const;

    // Density of z = mu + theta + N(0, sigma2) with theta from this mixture.
    double predictive_pdf(double z, const NullModel& null) const;
    double sample(Rng& rng) const;
};

struct DeconvolutionConfig {
    int max_iters = 2000;
    double tol = 1e-9;  // relative change in log-likelihood
    bool include_null = false;  // add a fixed N(mu, sigma2) component with free weight
};

struct DeconvolutionFit {
    GaussianMixturePrior signal;
    double null_weight = 0.0;  // only when include_null
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    int parameters = 0;
    double aic = 0.0;
};

DeconvolutionFit fit_deconvolution(std::span<const double> z, const NullModel& null, int components,
                                   const DeconvolutionConfig& config = {});

struct KSelection {
    int best = 1;
    std::vector<std::optional<DeconvolutionFit>> fits;  // index K - 1; empty when that K failed
    std::vector<std::string> warnings;
};

// Fits K = 1..max_components and returns the AIC minimizer
// (AIC = -2 loglik + 2 (3K - 1), plus 2 when the null weight is free).
KSelection select_components_by_aic(std::span<const double> z, const NullModel& null, int max_components,
                                    const DeconvolutionConfig& config = {});

int select_K_by_aic(std::span<const double> z, const NullModel& null, int max_components);

}  // namespace fdrreg

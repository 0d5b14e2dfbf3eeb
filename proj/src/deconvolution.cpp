#include "fdrreg/deconvolution.hpp"

#include "fdrreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace fdrreg {

void GaussianMixturePrior::validate() const {
    if (weight.empty()) throw DomainError("mixture needs at least one component");
    if (mean.size() != weight.size() || variance.size() != weight.size()) throw DomainError("mixture vectors differ in length");
    double total = 0.0;
    for (double w : weight) {
        if (!(w >= 0.0)) throw DomainError("mixture weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to one");
    for (double v : variance) {
        if (!(v > 0.0)) throw DomainError("mixture variances must be positive");
    }
}

double GaussianMixturePrior::predictive_pdf(double z, const NullModel& null) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < weight.size(); ++k) acc += weight[k] * normal_pdf(z, null.mu + mean[k], null.sigma2 + variance[k]);
    return acc;
}

double GaussianMixturePrior::sample(Rng& rng) const {
    std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
    const std::size_t k = pick(rng);
    std::normal_distribution<double> draw(mean[k], std::sqrt(variance[k]));
    return draw(rng);
}

DeconvolutionFit fit_deconvolution(std::span<const double> z, const NullModel& null, int components,
                                   const DeconvolutionConfig& config) {
    null.validate();
    if (components < 1) throw DomainError("need at least one mixture component");
    const std::size_t n = z.size();
    if (n < static_cast<std::size_t>(3 * components)) throw DegenerateDataError("too few observations for the mixture");
    const auto K = static_cast<std::size_t>(components);

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] - null.mu;
    std::vector<double> seed_pts;
    if (config.include_null) {
        for (double v : d) {
            if (std::abs(v) > 2.0 * null.sigma()) seed_pts.push_back(v);
        }
    }
    if (seed_pts.size() < 10 * K) seed_pts = d;
    std::sort(seed_pts.begin(), seed_pts.end());
    const double seed_mean = std::accumulate(seed_pts.begin(), seed_pts.end(), 0.0) / static_cast<double>(seed_pts.size());
    double seed_var = 0.0;
    for (double v : seed_pts) seed_var += (v - seed_mean) * (v - seed_mean);
    seed_var /= static_cast<double>(seed_pts.size());

    const double signal_total = config.include_null ? 0.1 : 1.0;
    double null_weight = config.include_null ? 0.9 : 0.0;
    std::vector<double> eta(K, signal_total / static_cast<double>(K));
    std::vector<double> mk(K), tau2(K, std::max(0.1, (seed_var - null.sigma2) / static_cast<double>(K)));
    for (std::size_t k = 0; k < K; ++k) {
        const auto idx = static_cast<std::size_t>((static_cast<double>(k) + 0.5) / static_cast<double>(K) *
                                                  static_cast<double>(seed_pts.size()));
        mk[k] = seed_pts[std::min(idx, seed_pts.size() - 1)];
    }

    const std::size_t cols = K + (config.include_null ? 1 : 0);
    std::vector<double> resp(n * cols);
    std::vector<double> logp(cols);
    DeconvolutionFit fit;
    double prev = -INFINITY;
    for (int it = 1; it <= config.max_iters; ++it) {
        // E-step.
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                logp[k] = (eta[k] > 0.0 ? std::log(eta[k]) : -INFINITY) + normal_logpdf(d[i], mk[k], null.sigma2 + tau2[k]);
            }
            if (config.include_null) {
                logp[K] = (null_weight > 0.0 ? std::log(null_weight) : -INFINITY) + normal_logpdf(d[i], 0.0, null.sigma2);
            }
            const double lse = log_sum_exp(logp);
            loglik += lse;
            for (std::size_t k = 0; k < cols; ++k) resp[i * cols + k] = std::exp(logp[k] - lse);
        }
        fit.iterations = it;
        fit.loglik = loglik;
        if (!std::isfinite(loglik)) throw ConvergenceError("deconvolution EM produced a non-finite likelihood");
        if (std::abs(loglik - prev) <= config.tol * std::abs(loglik)) {
            fit.converged = true;
            break;
        }
        prev = loglik;

        // M-step: exact maximizers, with tau2 >= 0 enforced by the variance floor sigma2.
        for (std::size_t k = 0; k < K; ++k) {
            double r = 0.0, s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                r += resp[i * cols + k];
                s += resp[i * cols + k] * d[i];
            }
            eta[k] = r / static_cast<double>(n);
            if (r < 1e-10) continue;
            mk[k] = s / r;
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) ss += resp[i * cols + k] * (d[i] - mk[k]) * (d[i] - mk[k]);
            tau2[k] = std::max(0.0, ss / r - null.sigma2);
        }
        if (config.include_null) {
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) r += resp[i * cols + K];
            null_weight = r / static_cast<double>(n);
        }
    }

    const double signal_mass = std::accumulate(eta.begin(), eta.end(), 0.0);
    if (!(signal_mass > 0.0)) throw DegenerateDataError("deconvolution mixture has no signal mass");
    fit.signal.weight.resize(K);
    for (std::size_t k = 0; k < K; ++k) fit.signal.weight[k] = eta[k] / signal_mass;
    fit.signal.mean = mk;
    // A point-mass component is kept as a very narrow Gaussian so it remains a valid prior.
    fit.signal.variance.resize(K);
    for (std::size_t k = 0; k < K; ++k) fit.signal.variance[k] = std::max(tau2[k], 1e-6);
    fit.null_weight = null_weight;
    fit.parameters = 3 * components - 1 + (config.include_null ? 1 : 0);
    fit.aic = -2.0 * fit.loglik + 2.0 * fit.parameters;
    return fit;
}

KSelection select_components_by_aic(std::span<const double> z, const NullModel& null, int max_components,
                                    const DeconvolutionConfig& config) {
    if (max_components < 1) throw DomainError("max_components must be at least 1");
    KSelection out;
    double best_aic = INFINITY;
    for (int k = 1; k <= max_components; ++k) {
        try {
            DeconvolutionFit fit = fit_deconvolution(z, null, k, config);
            if (fit.aic < best_aic) {
                best_aic = fit.aic;
                out.best = k;
            }
            out.fits.emplace_back(std::move(fit));
        } catch (const std::exception& e) {
            out.fits.emplace_back(std::nullopt);
            out.warnings.push_back("K=" + std::to_string(k) + " skipped: " + e.what());
        }
    }
    if (!std::isfinite(best_aic)) throw ConvergenceError("no mixture size could be fit");
    return out;
}

int select_K_by_aic(std::span<const double> z, const NullModel& null, int max_components) {
    return select_components_by_aic(z, null, max_components).best;
}

}  // namespace fdrreg

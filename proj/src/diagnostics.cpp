#include "fdrreg/diagnostics.hpp"

#include <gsl/gsl_cdf.h>

#include <cmath>
#include <numeric>
#include <vector>

namespace fdrreg {

double sample_mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double effective_sample_size(std::span<const double> draws) {
    const std::size_t n = draws.size();
    if (n < 4) return static_cast<double>(n);
    const double m = sample_mean(draws);
    std::vector<double> centred(n);
    for (std::size_t i = 0; i < n; ++i) centred[i] = draws[i] - m;
    const double c0 = std::inner_product(centred.begin(), centred.end(), centred.begin(), 0.0) / static_cast<double>(n);
    if (!(c0 > 0.0)) return static_cast<double>(n);
    auto autocorr = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) acc += centred[i] * centred[i + lag];
        return acc / (static_cast<double>(n) * c0);
    };
    // Geyer: sum pairs Gamma_k = rho_{2k} + rho_{2k+1} while positive, kept monotone.
    double tau = -1.0;
    double prev_pair = INFINITY;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = autocorr(2 * k) + autocorr(2 * k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    tau = std::max(tau, 1.0 / static_cast<double>(n));
    return static_cast<double>(n) / tau;
}

double mcmc_standard_error(std::span<const double> draws) {
    const double ess = effective_sample_size(draws);
    return std::sqrt(sample_variance(draws) / ess);
}

TTestResult one_sided_t_test(std::span<const double> x, double mu0) {
    TTestResult out;
    const double m = sample_mean(x);
    const double var = sample_variance(x);
    if (x.size() < 2 || !(var > 0.0)) {
        out.statistic = m > mu0 ? INFINITY : (m < mu0 ? -INFINITY : 0.0);
        out.p_value = m > mu0 ? 0.0 : 1.0;
        return out;
    }
    out.statistic = (m - mu0) / std::sqrt(var / static_cast<double>(x.size()));
    out.p_value = gsl_cdf_tdist_Q(out.statistic, static_cast<double>(x.size() - 1));
    return out;
}

}  // namespace fdrreg

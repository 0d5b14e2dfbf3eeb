#pragma once

// MCMC output summaries and the one-sided t-test used for benchmark tables.

#include <span>

namespace fdrreg {

// ESS from the initial positive sequence of autocorrelation pair sums.
double effective_sample_size(std::span<const double> draws);

// Monte Carlo standard error of the mean, sd / sqrt(ESS).
double mcmc_standard_error(std::span<const double> draws);

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);  // n - 1 denominator

struct TTestResult {
    double statistic = 0.0;
    double p_value = 1.0;  // upper-tail
};

// H1: mean > mu0. Zero variance gives p = 0 or 1 depending on the sign.
TTestResult one_sided_t_test(std::span<const double> x, double mu0);

}  // namespace fdrreg

#pragma once

// Marginal density of the test statistics by Lindsey's method: histogram the
// z-values and fit a log-linear Poisson model to the bin counts.

#include "fdrreg/model_core.hpp"

#include <span>

namespace fdrreg {

struct LindseyConfig {
    int bins = 150;
    int degree = 7;
    double pad_fraction = 0.1;  // histogram spans [min - pad*range, max + pad*range]
    int max_iters = 100;
    double tol = 1e-10;
    int table_points = 2001;
};

struct MarginalFit {
    GridDensity density;            // normalized to integrate to 1
    std::vector<double> midpoints;  // histogram bin centres
    std::vector<double> counts;
    std::vector<double> fitted;     // fitted Poisson means per bin
    double bin_width = 0.0;
};

MarginalFit fit_marginal_density(std::span<const double> z, const LindseyConfig& config = {});

// c_hat = 1 - min f_hat / f0 over the central region |z - mu| <= sigma,
// clipped to [0.001, 0.999].
double estimate_signal_fraction(const GridDensity& marginal, const NullModel& null);

// c_hat = 1 - p0 with p0 the ratio of f_hat to f0 mass over the null's
// interquartile range, clipped to [0.001, 0.999]. Used by EBm: (1 - c_hat) f0
// then exceeds f_hat on a neighbourhood of the null centre.
double estimate_signal_fraction_central(const GridDensity& marginal, const NullModel& null);

}  // namespace fdrreg

#pragma once

// Exact PG(1, c) draws by accept/reject on the exponentially tilted Jacobi
// density, with the alternating-series acceptance test split at t = 0.64.

#include "fdrreg/numerics.hpp"

namespace fdrreg {

class PolyaGammaSampler {
public:
    explicit PolyaGammaSampler(long max_proposals = 1'000'000) : max_proposals_(max_proposals) {}

    // One draw from PG(1, c). Throws ConvergenceError if no proposal is
    // accepted within the proposal budget.
    double draw(double c, Rng& rng) const;

private:
    long max_proposals_;
};

double sample_pg1(double c, Rng& rng);

// E[PG(1, c)] = tanh(c / 2) / (2c), with limit 1/4 at c = 0.
double pg1_mean(double c);

// log Phi(x), accurate in the far left tail.
double log_normal_cdf(double x);

}  // namespace fdrreg

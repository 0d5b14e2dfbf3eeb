#pragma once

#include "fdrreg/numerics.hpp"

#include <random>
#include <vector>

namespace testsupport {

inline std::vector<double> normal_draws(std::size_t n, double mean, double sd, std::uint64_t seed) {
    fdrreg::Rng rng(seed);
    std::normal_distribution<double> d(mean, sd);
    std::vector<double> out(n);
    for (double& v : out) v = d(rng);
    return out;
}

// (1 - c) N(0, 1) + c N(mean, sd^2)
inline std::vector<double> two_groups_draws(std::size_t n, double c, double mean, double sd, std::uint64_t seed,
                                            std::vector<int>* truth = nullptr) {
    fdrreg::Rng rng(seed);
    std::normal_distribution<double> null(0.0, 1.0);
    std::normal_distribution<double> alt(mean, sd);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(n);
    if (truth) truth->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool signal = u(rng) < c;
        out[i] = signal ? alt(rng) : null(rng);
        if (truth) (*truth)[i] = signal;
    }
    return out;
}

}  // namespace testsupport

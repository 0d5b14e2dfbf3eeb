#pragma once

// Predictive recursion for the mixing measure Psi = pi_1(theta) + pi0 * delta_0
// in z ~ N(mu + theta, sigma2), theta ~ Psi. The continuous sub-density lives on
// a fixed theta grid and integrals use the trapezoid rule on that grid.

#include "fdrreg/model_core.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fdrreg {

struct MixingMeasure {
    std::vector<double> grid;        // theta values, strictly increasing
    std::vector<double> subdensity;  // signal sub-density on grid, integrates to 1 - pi0
    double pi0 = 1.0;

    double signal_fraction() const { return 1.0 - pi0; }
    double continuous_mass() const;
    double total_mass() const { return pi0 + continuous_mass(); }
    void validate(double tol = 1e-6) const;
};

struct PRConfig {
    int passes = 10;
    double decay = 0.67;  // gamma_i = (i + 1)^(-decay)
    bool shuffle = true;
    std::uint64_t seed = 0;
    int grid_points = 400;
    double initial_pi0 = 0.95;
    std::optional<std::pair<double, double>> theta_limits;  // clip the automatic grid

    void validate() const;
};

// Evenly spaced theta grid on +/-(3 sigma + max |z - mu|), clipped to the
// configured limits.
std::vector<double> default_theta_grid(std::span<const double> z, const NullModel& null, const PRConfig& config);

// pi0 = initial_pi0, continuous part uniform with mass 1 - initial_pi0.
MixingMeasure initial_measure(std::vector<double> grid, double pi0);

// One recursion step with weight gamma. Returns false (leaving the state
// untouched) when both the null and signal responsibilities underflow.
bool pr_update_inplace(MixingMeasure& state, double z, const NullModel& null, double gamma);

MixingMeasure pr_update(const MixingMeasure& state, double z, const NullModel& null, double gamma);

struct PRResult {
    MixingMeasure measure;
    double c_hat = 0.0;
    std::size_t updates = 0;
    std::size_t skipped_updates = 0;
};

PRResult pr_fit(std::span<const double> z, const NullModel& null, const PRConfig& config = {});

// f1(z) = integral N(z | mu + theta, sigma2) pi(theta) dtheta with
// pi = subdensity / (1 - pi0). Throws ModelError when there is no signal mass.
double f1_at(const MixingMeasure& measure, const NullModel& null, double z);

// f1 tabulated on [mu + theta_min - 6 sigma, mu + theta_max + 6 sigma].
GridDensity f1_from_measure(const MixingMeasure& measure, const NullModel& null, int points = 1501);

}  // namespace fdrreg

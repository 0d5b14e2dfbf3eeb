#pragma once

// Theoretical or empirical Gaussian null: truncated maximum likelihood or
// central matching on the bulk of the z-values.

#include "fdrreg/model_core.hpp"

#include <optional>
#include <span>
#include <string_view>

namespace fdrreg {

enum class NullMethod { Theoretical, MLE, CentralMatching };

std::optional<NullMethod> parse_null_method(std::string_view name);
std::string_view null_method_name(NullMethod m);

struct EmpiricalNullConfig {
    NullMethod method = NullMethod::Theoretical;
    double central_fraction = 1.0 / 3.0;
    NullModel theoretical{0.0, 1.0};
    int mode_bins = 100;
    int matching_bins = 50;
    int max_iters = 500;
    double tol = 1e-6;  // simplex size for the MLE

    void validate() const;
};

struct CentralInterval {
    double lo = 0.0;
    double hi = 0.0;
    double mode = 0.0;
    std::size_t count = 0;
};

// Interval around the histogram mode holding `fraction` of the data, grown
// symmetrically in rank (equal counts below and above the mode when possible).
CentralInterval central_interval(std::span<const double> z, double fraction, int mode_bins = 100);

struct EmpiricalNullFit {
    NullModel null;
    double p0 = 1.0;  // estimated null proportion
    int iterations = 0;
};

EmpiricalNullFit empirical_null_mle(std::span<const double> z, const EmpiricalNullConfig& config);

NullModel empirical_null_central_matching(std::span<const double> z, const EmpiricalNullConfig& config);

// Least-squares quadratic a + b x + c x^2 through (x, log_density); requires c < 0
// and returns mu = -b / 2c, sigma2 = -1 / 2c.
NullModel null_from_log_density(std::span<const double> x, std::span<const double> log_density);

// Dispatches on config.method.
NullModel estimate_null(std::span<const double> z, const EmpiricalNullConfig& config);

}  // namespace fdrreg

#include "fdrreg/predictive_recursion.hpp"

#include "fdrreg/errors.hpp"
#include "fdrreg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fdrreg {

double MixingMeasure::continuous_mass() const { return trapezoid(grid, subdensity); }

void MixingMeasure::validate(double tol) const {
    if (grid.size() < 2 || grid.size() != subdensity.size()) throw DomainError("mixing measure grid is malformed");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) throw DomainError("mixing measure grid must be strictly increasing");
    }
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw DomainError("pi0 must lie in [0,1]");
    for (double v : subdensity) {
        if (!(v >= 0.0)) throw DomainError("sub-density must be non-negative");
    }
    if (std::abs(total_mass() - 1.0) > tol) throw DomainError("mixing measure is not normalized");
}

void PRConfig::validate() const {
    if (passes < 1) throw DomainError("predictive recursion needs at least one pass");
    if (!(decay > 2.0 / 3.0 && decay <= 1.0)) throw DomainError("decay exponent must lie in (2/3, 1]");
    if (grid_points < 3) throw DomainError("theta grid needs at least 3 points");
    if (!(initial_pi0 > 0.0 && initial_pi0 < 1.0)) throw DomainError("initial pi0 must lie in (0,1)");
    if (theta_limits && !(theta_limits->first < theta_limits->second)) throw DomainError("invalid theta limits");
}

std::vector<double> default_theta_grid(std::span<const double> z, const NullModel& null, const PRConfig& config) {
    double reach = 0.0;
    for (double v : z) reach = std::max(reach, std::abs(v - null.mu));
    reach += 3.0 * null.sigma();
    double lo = -reach;
    double hi = reach;
    if (config.theta_limits) {
        lo = std::max(lo, config.theta_limits->first);
        hi = std::min(hi, config.theta_limits->second);
        if (!(hi > lo)) throw DomainError("theta limits exclude the data range");
    }
    return linspace(lo, hi, static_cast<std::size_t>(config.grid_points));
}

MixingMeasure initial_measure(std::vector<double> grid, double pi0) {
    if (grid.size() < 2) throw DomainError("theta grid needs at least 2 points");
    MixingMeasure m;
    const double span = grid.back() - grid.front();
    m.subdensity.assign(grid.size(), (1.0 - pi0) / span);
    m.grid = std::move(grid);
    m.pi0 = pi0;
    return m;
}

bool pr_update_inplace(MixingMeasure& state, double z, const NullModel& null, double gamma) {
    if (gamma == 0.0) return true;
    const std::size_t g = state.grid.size();
    // Log-likelihoods relative to their maximum so extreme z cannot underflow
    // everything at once. The Gaussian normalizing constant cancels.
    thread_local std::vector<double> loglik;
    loglik.resize(g);
    const double half_prec = 0.5 / null.sigma2;
    const double d0 = z - null.mu;
    const double log_null = -half_prec * d0 * d0;
    double peak = log_null;
    for (std::size_t j = 0; j < g; ++j) {
        const double d = d0 - state.grid[j];
        loglik[j] = -half_prec * d * d;
        peak = std::max(peak, loglik[j]);
    }
    const double m0 = state.pi0 * std::exp(log_null - peak);
    thread_local std::vector<double> joint;
    joint.resize(g);
    double m1 = 0.0;
    for (std::size_t j = 0; j < g; ++j) {
        joint[j] = std::exp(loglik[j] - peak) * state.subdensity[j];
        if (j > 0) m1 += 0.5 * (state.grid[j] - state.grid[j - 1]) * (joint[j] + joint[j - 1]);
    }
    const double total = m0 + m1;
    if (!(total > 0.0) || !std::isfinite(total)) return false;
    // Written as x + gamma * (target - x): a fixed point stays bit-exact.
    state.pi0 += gamma * (m0 / total - state.pi0);
    for (std::size_t j = 0; j < g; ++j) state.subdensity[j] += gamma * (joint[j] / total - state.subdensity[j]);
    return true;
}

MixingMeasure pr_update(const MixingMeasure& state, double z, const NullModel& null, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in [0,1)");
    MixingMeasure next = state;
    pr_update_inplace(next, z, null, gamma);
    return next;
}

PRResult pr_fit(std::span<const double> z, const NullModel& null, const PRConfig& config) {
    config.validate();
    null.validate();
    if (z.empty()) throw DomainError("predictive recursion needs at least one test statistic");

    PRResult out;
    out.measure = initial_measure(default_theta_grid(z, null, config), config.initial_pi0);
    std::vector<std::size_t> order(z.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);
    std::size_t step = 0;
    for (int pass = 0; pass < config.passes; ++pass) {
        if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            ++step;
            const double gamma = std::pow(static_cast<double>(step + 1), -config.decay);
            if (!pr_update_inplace(out.measure, z[idx], null, gamma)) ++out.skipped_updates;
        }
    }
    out.updates = step;
    out.c_hat = out.measure.signal_fraction();
    return out;
}

double f1_at(const MixingMeasure& measure, const NullModel& null, double z) {
    const double c = measure.continuous_mass();
    if (!(measure.pi0 < 1.0) || !(c > 0.0)) throw ModelError("no signal mass");
    const double half_prec = 0.5 / null.sigma2;
    const double norm = std::exp(-kLogSqrt2Pi) / null.sigma();
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < measure.grid.size(); ++j) {
        const double d = z - null.mu - measure.grid[j];
        const double v = norm * std::exp(-half_prec * d * d) * measure.subdensity[j];
        if (j > 0) acc += 0.5 * (measure.grid[j] - measure.grid[j - 1]) * (v + prev);
        prev = v;
    }
    return acc / c;
}

GridDensity f1_from_measure(const MixingMeasure& measure, const NullModel& null, int points) {
    const double c = measure.continuous_mass();
    if (!(measure.pi0 < 1.0) || !(c > 0.0)) throw ModelError("no signal mass");
    const double pad = 6.0 * null.sigma();
    std::vector<double> zgrid =
        linspace(null.mu + measure.grid.front() - pad, null.mu + measure.grid.back() + pad, static_cast<std::size_t>(points));
    std::vector<double> values(zgrid.size());
    for (std::size_t k = 0; k < zgrid.size(); ++k) values[k] = f1_at(measure, null, zgrid[k]);
    return GridDensity(std::move(zgrid), std::move(values));
}

}  // namespace fdrreg

#include "fdrreg/marginal_density.hpp"

#include "fdrreg/errors.hpp"
#include "fdrreg/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace fdrreg {
namespace {

// Legendre polynomials P_0..P_degree at t in [-1, 1].
void legendre_row(double t, int degree, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    row(0) = 1.0;
    if (degree >= 1) row(1) = t;
    for (int k = 1; k < degree; ++k) {
        row(k + 1) = ((2.0 * k + 1.0) * t * row(k) - k * row(k - 1)) / (k + 1.0);
    }
}

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) > 0) dev += y(i) * std::log(y(i) / mu(i));
        dev -= y(i) - mu(i);
    }
    return 2.0 * dev;
}

}  // namespace

MarginalFit fit_marginal_density(std::span<const double> z, const LindseyConfig& config) {
    if (z.empty()) throw DegenerateDataError("no test statistics");
    if (config.bins < config.degree + 2) throw DomainError("too few bins for the polynomial degree");
    const auto [min_it, max_it] = std::minmax_element(z.begin(), z.end());
    const double range = *max_it - *min_it;
    if (!(range > 0.0)) throw DegenerateDataError("all test statistics are identical");

    const double lo = *min_it - config.pad_fraction * range;
    const double hi = *max_it + config.pad_fraction * range;
    const int nb = config.bins;
    const double width = (hi - lo) / nb;

    MarginalFit out;
    out.bin_width = width;
    out.counts.assign(nb, 0.0);
    out.midpoints.resize(nb);
    for (int b = 0; b < nb; ++b) out.midpoints[b] = lo + (b + 0.5) * width;
    for (double v : z) {
        int b = static_cast<int>((v - lo) / width);
        out.counts[std::clamp(b, 0, nb - 1)] += 1.0;
    }

    const double centre = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const int p = config.degree + 1;
    Eigen::MatrixXd B(nb, p);
    for (int b = 0; b < nb; ++b) legendre_row((out.midpoints[b] - centre) / half, config.degree, B.row(b));
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(out.counts.data(), nb);

    // Start from least squares on log(y + 1/2), then Poisson IRLS with step halving.
    Eigen::VectorXd ly = (y.array() + 0.5).log().matrix();
    Eigen::VectorXd beta = B.colPivHouseholderQr().solve(ly);
    Eigen::VectorXd eta = B * beta;
    Eigen::VectorXd mu = eta.array().exp().matrix();
    double dev = poisson_deviance(y, mu);
    bool converged = false;
    for (int it = 0; it < config.max_iters; ++it) {
        const Eigen::VectorXd work = eta + ((y - mu).array() / mu.array()).matrix();
        const Eigen::MatrixXd BtW = B.transpose() * mu.asDiagonal();
        const Eigen::VectorXd target = (BtW * B).ldlt().solve(BtW * work);
        Eigen::VectorXd step = target - beta;
        double new_dev = dev;
        Eigen::VectorXd cand;
        for (int halving = 0; halving < 30; ++halving) {
            cand = beta + step;
            const Eigen::VectorXd cand_mu = (B * cand).array().exp().matrix();
            new_dev = poisson_deviance(y, cand_mu);
            if (std::isfinite(new_dev) && new_dev <= dev + 1e-12 * std::abs(dev)) break;
            step *= 0.5;
        }
        beta = cand;
        eta = B * beta;
        mu = eta.array().exp().matrix();
        const double change = std::abs(dev - new_dev);
        dev = new_dev;
        if (change <= config.tol * (std::abs(dev) + 0.1)) {
            converged = true;
            break;
        }
    }
    if (!converged || !beta.allFinite()) throw ConvergenceError("Lindsey Poisson fit did not converge");
    out.fitted.assign(mu.data(), mu.data() + mu.size());

    // Tabulate the fitted log-density over the histogram span and normalize.
    std::vector<double> grid = linspace(lo, hi, static_cast<std::size_t>(config.table_points));
    std::vector<double> values(grid.size());
    Eigen::RowVectorXd row(p);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        legendre_row((grid[k] - centre) / half, config.degree, row);
        values[k] = std::exp(row.dot(beta));
    }
    const double mass = trapezoid(grid, values);
    if (!(mass > 0.0) || !std::isfinite(mass)) throw DegenerateDataError("marginal density has no mass");
    for (double& v : values) v /= mass;
    out.density = GridDensity(std::move(grid), std::move(values));
    return out;
}

double estimate_signal_fraction(const GridDensity& marginal, const NullModel& null) {
    null.validate();
    const double s = null.sigma();
    double min_ratio = INFINITY;
    for (double t : linspace(null.mu - s, null.mu + s, 201)) {
        min_ratio = std::min(min_ratio, marginal(t) / null.pdf(t));
    }
    return std::clamp(1.0 - min_ratio, 0.001, 0.999);
}

double estimate_signal_fraction_central(const GridDensity& marginal, const NullModel& null) {
    null.validate();
    const double half = 0.6744897501960817 * null.sigma();  // quartiles of the null
    const std::vector<double> t = linspace(null.mu - half, null.mu + half, 201);
    std::vector<double> fm(t.size()), f0(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        fm[i] = marginal(t[i]);
        f0[i] = null.pdf(t[i]);
    }
    return std::clamp(1.0 - trapezoid(t, fm) / trapezoid(t, f0), 0.001, 0.999);
}

}  // namespace fdrreg

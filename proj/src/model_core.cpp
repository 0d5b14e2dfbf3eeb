#include "fdrreg/model_core.hpp"

#include "fdrreg/errors.hpp"
#include "fdrreg/marginal_density.hpp"
#include "fdrreg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fdrreg {

void TestTable::validate() const {
    if (z.empty()) throw DomainError("test table is empty");
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i])) throw DomainError("z[" + std::to_string(i) + "] is not finite");
    }
    if (X.cols() > 0 && static_cast<std::size_t>(X.rows()) != z.size()) {
        throw DomainError("covariate matrix has " + std::to_string(X.rows()) + " rows, expected " +
                          std::to_string(z.size()));
    }
    if (!X.allFinite()) throw DomainError("covariate matrix has missing or non-finite entries");
    if (!names.empty() && names.size() != static_cast<std::size_t>(X.cols())) {
        throw DomainError("covariate names do not match covariate columns");
    }
}

double NullModel::sigma() const { return std::sqrt(sigma2); }
double NullModel::pdf(double z) const { return normal_pdf(z, mu, sigma2); }
double NullModel::logpdf(double z) const { return normal_logpdf(z, mu, sigma2); }

void NullModel::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("null variance must be positive");
    if (!std::isfinite(mu)) throw DomainError("null mean must be finite");
}

std::string_view method_name(Method m) {
    switch (m) {
        case Method::BH: return "BH";
        case Method::TwoGroups: return "2G";
        case Method::EBm: return "EBm";
        case Method::EB: return "EB";
        case Method::FB: return "FB";
    }
    return "?";
}

std::optional<Method> parse_method(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "bh") return Method::BH;
    if (lower == "2g") return Method::TwoGroups;
    if (lower == "ebm") return Method::EBm;
    if (lower == "eb") return Method::EB;
    if (lower == "fb") return Method::FB;
    return std::nullopt;
}

GridDensity::GridDensity(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != values_.size() || grid_.size() < 2) {
        throw DomainError("grid density needs matching grid/value vectors of length >= 2");
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) throw DomainError("grid density grid must be strictly increasing");
    }
    for (double v : values_) {
        if (!(v >= 0.0)) throw DomainError("grid density values must be non-negative");
    }
}

double GridDensity::operator()(double z) const {
    if (grid_.empty() || z < grid_.front() || z > grid_.back()) return 0.0;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), z);
    if (it == grid_.end()) return values_.back();
    const std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
    const std::size_t lo = hi - 1;
    const double t = (z - grid_[lo]) / (grid_[hi] - grid_[lo]);
    return (1.0 - t) * values_[lo] + t * values_[hi];
}

double GridDensity::integral() const { return trapezoid(grid_, values_); }

void RegressionFit::finalize_localfdr() {
    localfdr.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) localfdr[i] = 1.0 - w[i];
}

double posterior_probability(double c, double f1_at_z, double f0_at_z) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("prior probability must lie in [0,1]");
    if (!(f1_at_z >= 0.0) || !(f0_at_z >= 0.0)) throw DomainError("density values must be non-negative");
    if (c == 0.0) return 0.0;
    if (c == 1.0) return 1.0;
    const double num = c * f1_at_z;
    const double den = num + (1.0 - c) * f0_at_z;
    if (den == 0.0) throw DomainError("both density values are zero");
    return num / den;
}

std::vector<std::size_t> bayes_fdr_select(std::span<const double> localfdr, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    for (double v : localfdr) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("local fdr values must lie in [0,1]");
    }
    std::vector<std::size_t> order(localfdr.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return localfdr[a] < localfdr[b]; });
    std::size_t keep = 0;
    double running = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        running += localfdr[order[k]];
        if (running / static_cast<double>(k + 1) <= q) keep = k + 1;
    }
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> benjamini_hochberg_pvalues(std::span<const double> pvalues, double q) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (pvalues[order[i]] <= static_cast<double>(i + 1) * q / static_cast<double>(n)) k = i + 1;
    }
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.begin(), out.end());
    return out;
}

double two_sided_pvalue(double z, const NullModel& null) {
    return std::min(1.0, 2.0 * normal_sf(std::abs(z - null.mu) / null.sigma()));
}

std::vector<std::size_t> benjamini_hochberg(std::span<const double> z, const NullModel& null, double q) {
    null.validate();
    std::vector<double> p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) p[i] = two_sided_pvalue(z[i], null);
    return benjamini_hochberg_pvalues(p, q);
}

RegressionFit two_groups_fit(std::span<const double> z, const NullModel& null) {
    null.validate();
    if (z.size() < 50) throw DomainError("two-groups fit needs at least 50 test statistics");
    const MarginalFit marginal = fit_marginal_density(z);
    const double c_hat = estimate_signal_fraction(marginal.density, null);

    RegressionFit fit;
    fit.method = Method::TwoGroups;
    fit.c_hat = c_hat;
    fit.beta = Eigen::VectorXd::Constant(1, logit(c_hat));
    fit.w.resize(z.size());
    fit.priorprob.assign(z.size(), c_hat);
    double loglik = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double fhat = marginal.density(z[i]);
        const double f0 = null.pdf(z[i]);
        const double lfdr = fhat > 0.0 ? std::clamp((1.0 - c_hat) * f0 / fhat, 0.0, 1.0) : 1.0;
        fit.w[i] = 1.0 - lfdr;
        loglik += std::log(std::max(fhat, 1e-300));
    }
    fit.loglik = loglik;
    fit.iterations = 0;
    fit.finalize_localfdr();
    return fit;
}

}  // namespace fdrreg

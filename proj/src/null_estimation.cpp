#include "fdrreg/null_estimation.hpp"

#include "fdrreg/errors.hpp"
#include "fdrreg/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace fdrreg {

std::optional<NullMethod> parse_null_method(std::string_view name) {
    if (name == "theoretical") return NullMethod::Theoretical;
    if (name == "mle") return NullMethod::MLE;
    if (name == "central") return NullMethod::CentralMatching;
    return std::nullopt;
}

std::string_view null_method_name(NullMethod m) {
    switch (m) {
        case NullMethod::Theoretical: return "theoretical";
        case NullMethod::MLE: return "mle";
        case NullMethod::CentralMatching: return "central";
    }
    return "?";
}

void EmpiricalNullConfig::validate() const {
    if (!(central_fraction > 0.05 && central_fraction < 0.95)) {
        throw DomainError("central_fraction must lie in (0.05, 0.95)");
    }
    if (mode_bins < 2 || matching_bins < 3) throw DomainError("too few histogram bins");
    if (max_iters < 1 || !(tol > 0.0)) throw DomainError("invalid optimizer settings");
    theoretical.validate();
}

namespace {

void require_spread(std::span<const double> z, std::size_t min_n) {
    if (z.size() < min_n) {
        throw DomainError("empirical null needs at least " + std::to_string(min_n) + " test statistics");
    }
    const auto [lo, hi] = std::minmax_element(z.begin(), z.end());
    if (!(*hi > *lo)) throw DegenerateDataError("test statistics have zero variance");
}

struct TruncatedSample {
    std::vector<double> x;
    double lo;
    double hi;
    double total;  // size of the full sample
    double sx = 0.0;
    double sxx = 0.0;
};

// Truncated-normal likelihood of the central points plus the binomial
// likelihood of how many fell inside, with p0 = min(1, N0 / (N mass)).
// The p0 <= 1 bound keeps sigma finite when the central histogram is flat.
double truncated_nll(const gsl_vector* v, void* params) {
    const auto* s = static_cast<const TruncatedSample*>(params);
    const double mu = gsl_vector_get(v, 0);
    const double sigma = std::exp(gsl_vector_get(v, 1));
    const double mass = normal_cdf((s->hi - mu) / sigma) - normal_cdf((s->lo - mu) / sigma);
    if (!(mass > 0.0)) return 1e300;
    const double m = static_cast<double>(s->x.size());
    const double quad = (s->sxx - 2.0 * mu * s->sx + m * mu * mu) / (2.0 * sigma * sigma);
    const double p = std::min(1.0, m / (s->total * mass)) * mass;
    double binom = m * std::log(p);
    if (s->total > m) binom += (s->total - m) * std::log1p(-p);
    return (quad + m * std::log(sigma) + m * std::log(mass) - binom) / m;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* p) const { gsl_multimin_fminimizer_free(p); }
};
struct VectorDeleter {
    void operator()(gsl_vector* p) const { gsl_vector_free(p); }
};

}  // namespace

CentralInterval central_interval(std::span<const double> z, double fraction, int mode_bins) {
    std::vector<double> sorted(z.begin(), z.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const double width = (hi - lo) / mode_bins;
    std::vector<std::size_t> counts(static_cast<std::size_t>(mode_bins), 0);
    for (double v : sorted) {
        const int b = std::clamp(static_cast<int>((v - lo) / width), 0, mode_bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const double mode = lo + (static_cast<double>(best) + 0.5) * width;

    const std::size_t n = sorted.size();
    const auto half = static_cast<std::ptrdiff_t>(std::max<double>(1.0, std::floor(0.5 * fraction * n)));
    const auto m = static_cast<std::ptrdiff_t>(std::lower_bound(sorted.begin(), sorted.end(), mode) - sorted.begin());
    std::ptrdiff_t first = m - half;
    std::ptrdiff_t last = m + half - 1;
    // Shift the window if it runs past either end of the data.
    if (first < 0) {
        last -= first;
        first = 0;
    }
    if (last >= static_cast<std::ptrdiff_t>(n)) {
        first -= last - static_cast<std::ptrdiff_t>(n) + 1;
        last = static_cast<std::ptrdiff_t>(n) - 1;
        first = std::max<std::ptrdiff_t>(first, 0);
    }
    CentralInterval out;
    out.lo = sorted[static_cast<std::size_t>(first)];
    out.hi = sorted[static_cast<std::size_t>(last)];
    out.mode = mode;
    out.count = static_cast<std::size_t>(last - first + 1);
    return out;
}

EmpiricalNullFit empirical_null_mle(std::span<const double> z, const EmpiricalNullConfig& config) {
    config.validate();
    require_spread(z, 200);
    const CentralInterval iv = central_interval(z, config.central_fraction, config.mode_bins);
    if (!(iv.hi > iv.lo)) throw DegenerateDataError("central interval has zero width");

    TruncatedSample sample{{}, iv.lo, iv.hi, static_cast<double>(z.size())};
    for (double v : z) {
        if (v >= iv.lo && v <= iv.hi) {
            sample.x.push_back(v);
            sample.sx += v;
            sample.sxx += v * v;
        }
    }
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
    double ss = 0.0;
    for (double v : z) ss += (v - mean) * (v - mean);
    const double sd0 = std::sqrt(ss / static_cast<double>(z.size()));
    const double mu0 = std::accumulate(sample.x.begin(), sample.x.end(), 0.0) / static_cast<double>(sample.x.size());

    gsl_set_error_handler_off();
    gsl_multimin_function fn{&truncated_nll, 2, &sample};
    std::unique_ptr<gsl_vector, VectorDeleter> start(gsl_vector_alloc(2));
    std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(2));
    gsl_vector_set(start.get(), 0, mu0);
    gsl_vector_set(start.get(), 1, std::log(sd0));
    gsl_vector_set(steps.get(), 0, 0.1 * sd0);
    gsl_vector_set(steps.get(), 1, 0.1);
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> solver(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2));
    gsl_multimin_fminimizer_set(solver.get(), &fn, start.get(), steps.get());

    int status = GSL_CONTINUE;
    int iter = 0;
    while (status == GSL_CONTINUE && iter < config.max_iters) {
        ++iter;
        const double size = gsl_multimin_fminimizer_size(solver.get());
        if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) {
            // No further progress at rounding level counts as converged.
            if (size <= 100.0 * config.tol) status = GSL_SUCCESS;
            break;
        }
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), config.tol);
    }
    if (status != GSL_SUCCESS) {
        throw ConvergenceError("empirical null MLE did not converge in " + std::to_string(config.max_iters) +
                               " iterations");
    }
    EmpiricalNullFit out;
    out.null.mu = gsl_vector_get(solver->x, 0);
    const double sigma = std::exp(gsl_vector_get(solver->x, 1));
    out.null.sigma2 = sigma * sigma;
    out.iterations = iter;
    const double mass = normal_cdf((iv.hi - out.null.mu) / sigma) - normal_cdf((iv.lo - out.null.mu) / sigma);
    out.p0 = std::min(1.0, static_cast<double>(sample.x.size()) / (static_cast<double>(z.size()) * mass));
    return out;
}

NullModel null_from_log_density(std::span<const double> x, std::span<const double> log_density) {
    if (x.size() != log_density.size() || x.size() < 3) throw DomainError("need at least 3 points for a quadratic");
    const auto n = static_cast<Eigen::Index>(x.size());
    // Centre and scale x for conditioning, then map the coefficients back.
    const double centre = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v - centre));
    if (!(scale > 0.0)) throw DegenerateDataError("quadratic fit needs distinct points");
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (x[static_cast<std::size_t>(i)] - centre) / scale;
        A(i, 0) = 1.0;
        A(i, 1) = t;
        A(i, 2) = t * t;
        y(i) = log_density[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(y);
    const double b = coef(1) / scale - 2.0 * coef(2) * centre / (scale * scale);
    const double c = coef(2) / (scale * scale);
    if (!(c < 0.0)) throw ModelError("non-concave central density");
    return NullModel{-b / (2.0 * c), -1.0 / (2.0 * c)};
}

NullModel empirical_null_central_matching(std::span<const double> z, const EmpiricalNullConfig& config) {
    config.validate();
    require_spread(z, 200);
    const CentralInterval iv = central_interval(z, config.central_fraction, config.mode_bins);
    if (!(iv.hi > iv.lo)) throw DegenerateDataError("central interval has zero width");
    const int nb = config.matching_bins;
    const double width = (iv.hi - iv.lo) / nb;
    std::vector<double> counts(static_cast<std::size_t>(nb), 0.0);
    for (double v : z) {
        if (v < iv.lo || v > iv.hi) continue;
        const int b = std::clamp(static_cast<int>((v - iv.lo) / width), 0, nb - 1);
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    std::vector<double> mids;
    std::vector<double> logs;
    for (int b = 0; b < nb; ++b) {
        if (counts[static_cast<std::size_t>(b)] <= 0.0) continue;
        mids.push_back(iv.lo + (b + 0.5) * width);
        logs.push_back(std::log(counts[static_cast<std::size_t>(b)]));
    }
    if (mids.size() < 3) throw DegenerateDataError("central region has fewer than 3 occupied bins");
    return null_from_log_density(mids, logs);
}

NullModel estimate_null(std::span<const double> z, const EmpiricalNullConfig& config) {
    switch (config.method) {
        case NullMethod::Theoretical: config.theoretical.validate(); return config.theoretical;
        case NullMethod::MLE: return empirical_null_mle(z, config).null;
        case NullMethod::CentralMatching: return empirical_null_central_matching(z, config);
    }
    throw DomainError("unknown null method");
}

}  // namespace fdrreg

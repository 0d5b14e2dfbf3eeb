#include "fdrreg/polya_gamma.hpp"

#include "fdrreg/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace fdrreg {
namespace {

constexpr double kTrunc = 0.64;
constexpr double kPi = std::numbers::pi;

// n-th coefficient of the alternating series for the Jacobi density at x.
double series_term(int n, double x) {
    const double k = n + 0.5;
    if (x > kTrunc) return kPi * k * std::exp(-0.5 * k * k * kPi * kPi * x);
    return kPi * k * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * k * k / x);
}

// Probability of proposing from the truncated exponential (right) piece.
double right_piece_mass(double z, double fz) {
    const double root = std::sqrt(1.0 / kTrunc);
    const double b = root * (kTrunc * z - 1.0);
    const double a = -root * (kTrunc * z + 1.0);
    const double x0 = std::log(fz) + fz * kTrunc;
    const double xb = x0 - z + log_normal_cdf(b);
    const double xa = x0 + z + log_normal_cdf(a);
    const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
    return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian with mean 1/z and shape 1, truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    const double mu = 1.0 / z;
    double x = kTrunc + 1.0;
    if (mu > kTrunc) {
        double alpha = 0.0;
        do {
            double e1 = 0.0;
            double e2 = 0.0;
            do {
                e1 = expo(rng);
                e2 = expo(rng);
            } while (e1 * e1 > 2.0 * e2 / kTrunc);
            x = kTrunc / ((1.0 + kTrunc * e1) * (1.0 + kTrunc * e1));
            alpha = std::exp(-0.5 * z * z * x);
        } while (unif(rng) > alpha);
    } else {
        while (x > kTrunc) {
            const double y = norm(rng);
            const double my = mu * y * y;
            x = mu + 0.5 * mu * my - 0.5 * mu * std::sqrt(4.0 * my + my * my);
            if (unif(rng) > mu / (mu + x)) x = mu * mu / x;
        }
    }
    return x;
}

}  // namespace

double log_normal_cdf(double x) {
    if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    // Asymptotic expansion of the Mills ratio.
    const double x2 = x * x;
    return -0.5 * x2 - std::log(-x) - kLogSqrt2Pi + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double pg1_mean(double c) {
    const double a = std::abs(c);
    if (a < 1e-6) return 0.25 - a * a / 48.0;
    return std::tanh(0.5 * a) / (2.0 * a);
}

double PolyaGammaSampler::draw(double c, Rng& rng) const {
    if (!std::isfinite(c)) throw DomainError("PG tilt must be finite");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    const double z = 0.5 * std::abs(c);
    const double fz = kPi * kPi / 8.0 + 0.5 * z * z;
    const double p_right = right_piece_mass(z, fz);

    for (long proposal = 0; proposal < max_proposals_; ++proposal) {
        const double x = unif(rng) < p_right ? kTrunc + expo(rng) / fz : truncated_inverse_gaussian(z, rng);
        double s = series_term(0, x);
        const double y = unif(rng) * s;
        for (int n = 1;; ++n) {
            if (n % 2 == 1) {
                s -= series_term(n, x);
                if (y <= s) return 0.25 * x;
            } else {
                s += series_term(n, x);
                if (y > s) break;
            }
        }
    }
    throw ConvergenceError("Polya-Gamma sampler exceeded its proposal budget");
}

double sample_pg1(double c, Rng& rng) {
    static const PolyaGammaSampler sampler;
    return sampler.draw(c, rng);
}

}  // namespace fdrreg

#include "fdrreg/errors.hpp"
#include "fdrreg/polya_gamma.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace fdrreg;

namespace {

double pg1_variance(double c) {
    if (c == 0.0) return 1.0 / 24.0;
    const double ch = std::cosh(0.5 * c);
    return (std::sinh(c) - c) / (4.0 * c * c * c * ch * ch);
}

// E exp(-t w) for w ~ PG(1, c)
double pg1_laplace(double c, double t) { return std::cosh(0.5 * c) / std::cosh(std::sqrt(0.25 * c * c + 0.5 * t)); }

}  // namespace

TEST_SUITE("polya-gamma") {

TEST_CASE("closed-form mean") {
    CHECK(pg1_mean(0.0) == 0.25);
    CHECK(pg1_mean(1e-8) == doctest::Approx(0.25));
    CHECK(pg1_mean(2.0) == doctest::Approx(std::tanh(1.0) / 4.0));
    CHECK(pg1_mean(-3.0) == pg1_mean(3.0));
}

TEST_CASE("log normal cdf in the tails") {
    CHECK(log_normal_cdf(0.0) == doctest::Approx(std::log(0.5)));
    CHECK(log_normal_cdf(-40.0) == doctest::Approx(-804.6084420137538).epsilon(1e-10));
    CHECK(log_normal_cdf(10.0) == doctest::Approx(-7.619853024160527e-24).epsilon(1e-8));
}

TEST_CASE("draw moments and Laplace transform") {
    Rng rng(2024);
    const int n = 200000;
    for (double c : {0.0, 1.0, 2.0, 4.0, 10.0, -2.5}) {
        double s = 0.0, ss = 0.0, lt = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w = sample_pg1(c, rng);
            REQUIRE(w > 0.0);
            s += w;
            ss += w * w;
            lt += std::exp(-w);
        }
        const double mean = s / n;
        const double var = ss / n - mean * mean;
        const double se = std::sqrt(pg1_variance(std::abs(c)) / n);
        CAPTURE(c);
        CHECK(std::abs(mean - pg1_mean(c)) < 5.0 * se);
        CHECK(var == doctest::Approx(pg1_variance(std::abs(c))).epsilon(0.03));
        CHECK(lt / n == doctest::Approx(pg1_laplace(c, 1.0)).epsilon(2e-3));
    }
}

TEST_CASE("draws at c and -c have the same distribution") {
    Rng rng(8);
    const int n = 100000;
    std::vector<double> a(n), b(n);
    for (double& v : a) v = sample_pg1(1.7, rng);
    for (double& v : b) v = sample_pg1(-1.7, rng);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) - static_cast<double>(j)) / n);
    }
    // two-sample KS critical value at alpha = 0.01
    CHECK(d < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("draws are reproducible from the seed") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) CHECK(sample_pg1(1.3, a) == sample_pg1(1.3, b));
}

TEST_CASE("non-finite tilt is rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_pg1(NAN, rng), DomainError);
    CHECK_THROWS_AS(sample_pg1(INFINITY, rng), DomainError);
}

}  // TEST_SUITE

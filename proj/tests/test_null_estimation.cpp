#include "fdrreg/errors.hpp"
#include "fdrreg/null_estimation.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fdrreg;

namespace {

EmpiricalNullConfig config(NullMethod m, double fraction = 0.8) {
    EmpiricalNullConfig c;
    c.method = m;
    c.central_fraction = fraction;
    return c;
}

}  // namespace

TEST_SUITE("null-estimation") {

TEST_CASE("method names round trip") {
    for (auto m : {NullMethod::Theoretical, NullMethod::MLE, NullMethod::CentralMatching}) {
        CHECK(parse_null_method(null_method_name(m)) == m);
    }
    CHECK(!parse_null_method("bogus"));
}

TEST_CASE("theoretical null is returned unchanged") {
    const auto z = testsupport::normal_draws(500, 3.0, 2.0, 1);
    const auto null = estimate_null(z, EmpiricalNullConfig{});
    CHECK(null.mu == 0.0);
    CHECK(null.sigma2 == 1.0);
}

TEST_CASE("MLE recovers a standard normal null") {
    const auto z = testsupport::normal_draws(100000, 0.0, 1.0, 2);
    const auto fit = empirical_null_mle(z, config(NullMethod::MLE));
    CHECK(std::abs(fit.null.mu) <= 0.02);
    CHECK(std::abs(fit.null.sigma() - 1.0) <= 0.02);
    CHECK(fit.p0 > 0.95);
}

TEST_CASE("MLE recovers a shifted and scaled null") {
    const auto z = testsupport::normal_draws(100000, 0.6, 0.8, 3);
    const auto fit = empirical_null_mle(z, config(NullMethod::MLE));
    CHECK(fit.null.mu == doctest::Approx(0.6).epsilon(0.02 / 0.6));
    CHECK(std::abs(fit.null.sigma() - 0.8) <= 0.02);
}

TEST_CASE("MLE converges at the default central fraction") {
    const auto z = testsupport::normal_draws(100000, 0.0, 1.0, 4);
    const auto fit = empirical_null_mle(z, config(NullMethod::MLE, 1.0 / 3.0));
    CHECK(std::abs(fit.null.mu) <= 0.05);
    CHECK(std::abs(fit.null.sigma() - 1.0) <= 0.08);
}

TEST_CASE("MLE ignores a well separated signal tail") {
    auto z = testsupport::two_groups_draws(50000, 0.1, 4.0, 1.0, 5);
    const auto fit = empirical_null_mle(z, config(NullMethod::MLE));
    CHECK(std::abs(fit.null.mu) <= 0.1);
    CHECK(std::abs(fit.null.sigma() - 1.0) <= 0.1);
}

TEST_CASE("central matching on an exact log density") {
    const auto x = linspace(-1.0, 1.0, 21);
    std::vector<double> logs;
    for (double v : x) logs.push_back(normal_logpdf(v, 0.0, 1.0));
    const auto n = null_from_log_density(x, logs);
    CHECK(n.mu == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(n.sigma2 == doctest::Approx(1.0).epsilon(1e-9));
    std::vector<double> shifted;
    for (double v : x) shifted.push_back(5.0 + normal_logpdf(v, 0.3, 0.25));
    const auto m = null_from_log_density(x, shifted);
    CHECK(m.mu == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(m.sigma2 == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("central matching recovers N(2, 4)") {
    const auto z = testsupport::normal_draws(100000, 2.0, 2.0, 6);
    const auto n = empirical_null_central_matching(z, config(NullMethod::CentralMatching));
    CHECK(std::abs(n.mu - 2.0) <= 0.05);
    CHECK(std::abs(n.sigma() - 2.0) <= 0.05);
}

TEST_CASE("convex central log density is a model error") {
    const auto x = linspace(-1.0, 1.0, 21);
    std::vector<double> logs;
    for (double v : x) logs.push_back(v * v);
    CHECK_THROWS_AS(null_from_log_density(x, logs), ModelError);
}

TEST_CASE("bimodal data with a trough at the centre is rejected") {
    auto z = testsupport::normal_draws(20000, -2.0, 0.5, 7);
    const auto right = testsupport::normal_draws(20000, 2.0, 0.5, 8);
    z.insert(z.end(), right.begin(), right.end());
    // the window from the mode spans both peaks and the trough
    CHECK_THROWS_AS(empirical_null_central_matching(z, config(NullMethod::CentralMatching, 0.9)), ModelError);
}

TEST_CASE("degenerate inputs") {
    const std::vector<double> same(1000, 0.5);
    CHECK_THROWS_AS(empirical_null_mle(same, config(NullMethod::MLE)), DegenerateDataError);
    CHECK_THROWS_AS(empirical_null_central_matching(same, config(NullMethod::CentralMatching)), DegenerateDataError);
    auto bad = config(NullMethod::MLE, 1.5);
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("central interval holds the requested fraction around the mode") {
    const auto z = testsupport::normal_draws(10000, 1.0, 1.0, 9);
    const auto iv = central_interval(z, 0.5);
    CHECK(iv.count == 5000);
    CHECK(iv.lo < iv.mode);
    CHECK(iv.hi > iv.mode);
    CHECK(std::abs(iv.mode - 1.0) < 0.3);
}

}  // TEST_SUITE

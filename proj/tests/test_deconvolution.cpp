#include "fdrreg/deconvolution.hpp"
#include "fdrreg/errors.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fdrreg;

namespace {

std::vector<double> mixture_draws(const GaussianMixturePrior& prior, double null_weight, std::size_t n,
                                  std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> z(n);
    for (double& v : z) v = (u(rng) < null_weight ? 0.0 : prior.sample(rng)) + noise(rng);
    return z;
}

}  // namespace

TEST_SUITE("deconvolution") {

TEST_CASE("predictive density integrates to one") {
    const GaussianMixturePrior p{{0.3, 0.7}, {-2.0, 1.5}, {0.5, 2.0}};
    const NullModel null{0.4, 1.3};
    const auto x = linspace(-20, 20, 8001);
    std::vector<double> y;
    for (double v : x) y.push_back(p.predictive_pdf(v, null));
    CHECK(trapezoid(x, y) == doctest::Approx(1.0).epsilon(1e-8));
    // single component reduces to N(mu + m, sigma2 + tau2)
    const GaussianMixturePrior one{{1.0}, {2.0}, {3.0}};
    CHECK(one.predictive_pdf(1.0, null) == doctest::Approx(normal_pdf(1.0, 2.4, 4.3)));
}

TEST_CASE("prior validation") {
    const GaussianMixturePrior bad_weights{{0.5, 0.6}, {0.0, 1.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(bad_weights.validate(), DomainError);
    const GaussianMixturePrior bad_var{{1.0}, {0.0}, {-1.0}};
    CHECK_THROWS_AS(bad_var.validate(), DomainError);
    const GaussianMixturePrior ragged{{1.0}, {0.0, 1.0}, {1.0}};
    CHECK_THROWS_AS(ragged.validate(), DomainError);
}

TEST_CASE("single component fit recovers mean and variance") {
    const GaussianMixturePrior truth{{1.0}, {2.0}, {1.0}};
    const auto z = mixture_draws(truth, 0.0, 20000, 1);
    const auto fit = fit_deconvolution(z, NullModel{}, 1);
    CHECK(fit.converged);
    CHECK(fit.signal.mean[0] == doctest::Approx(2.0).epsilon(0.02));
    CHECK(fit.signal.variance[0] == doctest::Approx(1.0).epsilon(0.06));
    CHECK(fit.parameters == 2);
    CHECK(fit.aic == doctest::Approx(-2 * fit.loglik + 4));
}

TEST_CASE("fit with a free null weight") {
    const GaussianMixturePrior truth{{1.0}, {3.0}, {0.5}};
    const auto z = mixture_draws(truth, 0.8, 20000, 2);
    DeconvolutionConfig cfg;
    cfg.include_null = true;
    const auto fit = fit_deconvolution(z, NullModel{}, 1, cfg);
    CHECK(fit.null_weight == doctest::Approx(0.8).epsilon(0.03));
    CHECK(fit.signal.mean[0] == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("log-likelihood never decreases with K on nested fits") {
    const GaussianMixturePrior truth{{0.5, 0.5}, {-3.0, 3.0}, {0.2, 0.2}};
    const auto z = mixture_draws(truth, 0.0, 5000, 3);
    const auto k1 = fit_deconvolution(z, NullModel{}, 1);
    const auto k2 = fit_deconvolution(z, NullModel{}, 2);
    CHECK(k2.loglik > k1.loglik);
}

TEST_CASE("AIC picks two well separated components") {
    const GaussianMixturePrior truth{{0.4, 0.6}, {-3.0, 2.5}, {0.3, 0.3}};
    const auto z = mixture_draws(truth, 0.0, 5000, 4);
    const auto sel = select_components_by_aic(z, NullModel{}, 4);
    CHECK(sel.best == 2);
    REQUIRE(sel.fits.size() == 4);
    REQUIRE(sel.fits[1].has_value());
    for (std::size_t k = 0; k < sel.fits.size(); ++k) {
        if (sel.fits[k]) CHECK(sel.fits[k]->aic >= sel.fits[1]->aic);
    }
    CHECK(select_K_by_aic(z, NullModel{}, 4) == 2);
}

TEST_CASE("AIC keeps one component for unimodal effects") {
    const GaussianMixturePrior truth{{1.0}, {0.0}, {4.0}};
    const auto z = mixture_draws(truth, 0.0, 3000, 5);
    CHECK(select_K_by_aic(z, NullModel{}, 3) == 1);
}

TEST_CASE("AIC selection across seeded runs") {
    int single = 0, spikes = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto one = mixture_draws(GaussianMixturePrior{{1.0}, {2.0}, {1.0}}, 0.0, 2000, 100 + seed);
        single += select_K_by_aic(one, NullModel{}, 4) == 1;
        const auto four = mixture_draws(GaussianMixturePrior{{0.2, 0.3, 0.3, 0.2}, {-3.0, -1.5, 1.5, 3.0},
                                                             {0.01, 0.01, 0.01, 0.01}},
                                        0.0, 10000, 200 + seed);
        const int k = select_K_by_aic(four, NullModel{}, 5);
        spikes += k >= 3 && k <= 5;
    }
    CHECK(single >= 8);
    CHECK(spikes >= 8);
    const auto z = testsupport::normal_draws(100, 1.0, 1.5, 9);
    CHECK(select_K_by_aic(z, NullModel{}, 1) == 1);
}

TEST_CASE("too few observations") {
    const std::vector<double> z{0.1, 0.2, 0.3};
    CHECK_THROWS_AS(fit_deconvolution(z, NullModel{}, 2), DegenerateDataError);
    CHECK_THROWS_AS(fit_deconvolution(z, NullModel{}, 0), DomainError);
}

}  // TEST_SUITE

#include "fdrreg/basis_splines.hpp"
#include "fdrreg/em_fdrr.hpp"
#include "fdrreg/errors.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace fdrreg;

namespace {

GridDensity normal_grid(double mean, double var) {
    auto g = linspace(mean - 30.0, mean + 30.0, 6001);
    std::vector<double> v;
    for (double x : g) v.push_back(normal_pdf(x, mean, var));
    return GridDensity(std::move(g), std::move(v));
}

struct Instance {
    std::vector<double> z;
    Eigen::MatrixXd X;
    std::vector<double> prior;
};

// c(x) = logistic(a + b x), signals N(0, 1 + tau2)
Instance logistic_instance(std::size_t n, double a, double b, double tau2, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    Instance inst;
    inst.X.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = u(rng);
        const double c = logistic(a + b * x);
        inst.X(static_cast<Eigen::Index>(i), 0) = 1.0;
        inst.X(static_cast<Eigen::Index>(i), 1) = x;
        inst.prior.push_back(c);
        const double theta = u(rng) < c ? std::sqrt(tau2) * noise(rng) : 0.0;
        inst.z.push_back(theta + noise(rng));
    }
    return inst;
}

}  // namespace

TEST_SUITE("em-fdrr") {

TEST_CASE("penalty vector leaves constant columns unpenalized") {
    Eigen::MatrixXd X(3, 3);
    X << 1, 0.1, 2, 1, 0.5, 2, 1, 0.9, 2;
    EMConfig cfg;
    const auto p = penalty_vector(X, cfg);
    CHECK(p(0) == 0.0);
    CHECK(p(1) == 1.0);
    CHECK(p(2) == 0.0);
}

TEST_CASE("q gradient matches finite differences") {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(60, 4);
        X.col(0).setOnes();
        std::vector<double> w(60);
        for (double& v : w) v = u(rng);
        Eigen::VectorXd beta = Eigen::VectorXd::Random(4);
        Eigen::VectorXd pen = Eigen::VectorXd::Constant(4, 0.7);
        pen(0) = 0.0;
        const auto g = q_gradient(X, w, beta, pen);
        for (int k = 0; k < 4; ++k) {
            const double h = 1e-6;
            Eigen::VectorXd bp = beta, bm = beta;
            bp(k) += h;
            bm(k) -= h;
            const double fd = (q_objective(X, w, bp, pen) - q_objective(X, w, bm, pen)) / (2 * h);
            CHECK(g(k) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("Newton M-step reaches a stationary point") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(200, 3);
    X.col(0).setOnes();
    std::vector<double> w(200);
    for (int i = 0; i < 200; ++i) w[static_cast<std::size_t>(i)] = X(i, 1) > 0 ? 0.8 : 0.1;
    Eigen::VectorXd pen = Eigen::VectorXd::Ones(3);
    pen(0) = 0.0;
    const auto r = maximize_q(X, w, Eigen::VectorXd::Zero(3), pen, 50, 1e-12);
    CHECK(r.converged);
    CHECK(q_gradient(X, w, r.beta, pen).norm() < 1e-8);
}

TEST_CASE("EB objective is monotone on random instances") {
    const auto f1 = normal_grid(0.0, 1.0 + 4.0);
    std::size_t flagged = 0;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto inst = logistic_instance(400, -2.0, 2.5, 4.0, 100 + seed);
        const auto d = design_matrix(inst.X.rightCols(1), BasisSpec{});
        EMConfig cfg;
        cfg.rel_tol = 1e-10;
        const auto fit = em_fit(inst.z, d.matrix, NullModel{}, f1, cfg, 0.1);
        flagged += fit.flagged_nonmonotone.size();
        for (std::size_t t = 1; t < fit.objective_trace.size(); ++t) {
            const double prev = fit.objective_trace[t - 1];
            CHECK(fit.objective_trace[t] >= prev - 1e-9 * std::max(1.0, std::abs(prev)));
            ++checked;
        }
    }
    CHECK(flagged == 0);
    CHECK(checked > 100);
}

TEST_CASE("intercept-only EB matches a direct maximization over c") {
    const auto f1 = normal_grid(0.0, 1.0 + 9.0);
    const auto z = testsupport::two_groups_draws(3000, 0.15, 0.0, std::sqrt(10.0), 5);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3000, 1);
    EMConfig cfg;
    cfg.rel_tol = 1e-14;
    cfg.max_iters = 5000;
    const auto fit = em_fit(z, X, NullModel{}, f1, cfg, 0.5);
    auto loglik = [&](double c) {
        double s = 0.0;
        for (double v : z) s += std::log(c * f1(v) + (1 - c) * normal_pdf(v, 0.0, 1.0));
        return s;
    };
    // golden section
    double lo = 1e-4, hi = 1 - 1e-4;
    const double r = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 80; ++it) {
        const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
        if (loglik(a) < loglik(b)) lo = a; else hi = b;
    }
    CHECK(logistic(fit.beta(0)) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-4));
    CHECK(fit.loglik == doctest::Approx(loglik(0.5 * (lo + hi))).epsilon(1e-8));
}

TEST_CASE("EB with f1 equal to f0 cannot move the prior from its start") {
    // w_i = c_i for every i, so the M-step keeps c fixed
    const auto f0 = normal_grid(0.0, 1.0);
    const auto z = testsupport::normal_draws(500, 0.0, 1.0, 6);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(500, 1);
    const auto fit = em_fit(z, X, NullModel{}, f0, EMConfig{}, 0.3);
    CHECK(logistic(fit.beta(0)) == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("EB recovers a covariate trend") {
    const auto f1 = normal_grid(0.0, 1.0 + 9.0);
    const auto inst = logistic_instance(20000, -3.0, 3.0, 9.0, 7);
    const auto d = design_matrix(inst.X.rightCols(1), BasisSpec{});
    const auto fit = em_fit(inst.z, d.matrix, NullModel{}, f1, EMConfig{}, 0.1);
    CHECK(fit.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < inst.prior.size(); ++i) err = std::max(err, std::abs(fit.priorprob[i] - inst.prior[i]));
    CHECK(err < 0.12);
    for (std::size_t i = 0; i < fit.w.size(); ++i) CHECK(fit.localfdr[i] == 1.0 - fit.w[i]);
}

TEST_CASE("observed log-likelihood overloads agree") {
    const auto f1 = normal_grid(1.0, 3.0);
    const auto inst = logistic_instance(100, -1.0, 1.0, 2.0, 8);
    Eigen::VectorXd beta(2);
    beta << -1.0, 0.5;
    std::vector<double> lf0, lf1;
    for (double v : inst.z) {
        lf0.push_back(normal_logpdf(v, 0.0, 1.0));
        lf1.push_back(std::log(f1(v)));
    }
    const Eigen::VectorXd s = inst.X * beta;
    CHECK(observed_loglik(inst.z, inst.X, beta, NullModel{}, f1) ==
          doctest::Approx(observed_loglik(lf0, lf1, s)).epsilon(1e-10));
}

TEST_CASE("ebm weight") {
    CHECK(ebm_weight(0.2, 0.4, 0.3, 0.1) == 0.0);
    CHECK(ebm_weight(0.2, 0.4, 0.5, 0.1) == doctest::Approx(0.36));
    CHECK(ebm_weight(0.9, 0.01, 0.5, 0.1) == doctest::Approx(1.0 - 0.1 * 0.01 / 0.5));
    CHECK(ebm_weight(0.0, 0.1, 0.5, 0.1) == doctest::Approx(0.8));
}

TEST_CASE("EBm runs end to end and flags are recorded") {
    const auto inst = logistic_instance(5000, -2.0, 2.0, 9.0, 9);
    const auto d = design_matrix(inst.X.rightCols(1), BasisSpec{});
    const auto fit = fit_ebm(inst.z, d.matrix, NullModel{}, EMConfig{});
    CHECK(fit.method == Method::EBm);
    CHECK(fit.c_hat > 0.0);
    CHECK(fit.objective_trace.size() == static_cast<std::size_t>(fit.iterations) + 1);
    for (double w : fit.w) CHECK((w >= 0.0 && w <= 1.0));
}

TEST_CASE("rank deficient designs are rejected with column names") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(20, 2);
    const auto pen = penalty_vector(X, EMConfig{});
    std::vector<ColumnInfo> cols{{"intercept", -1, -1}, {"dup", 0, 0}};
    try {
        check_identifiable(X, pen, cols);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK((msg.find("intercept") != std::string::npos || msg.find("dup") != std::string::npos));
    }
}

TEST_CASE("config validation and dimension checks") {
    EMConfig cfg;
    cfg.ridge = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    const std::vector<double> a{0.0, 1.0}, b{0.0};
    CHECK_THROWS_AS(em_fit_logdens(a, b, Eigen::MatrixXd::Ones(2, 1), EMConfig{}, 0.1), DomainError);
}

}  // TEST_SUITE

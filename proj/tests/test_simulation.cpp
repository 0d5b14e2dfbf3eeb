#include "fdrreg/errors.hpp"
#include "fdrreg/simulation.hpp"

#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

using namespace fdrreg;

TEST_SUITE("simulation") {

TEST_CASE("function names round trip") {
    for (auto f : {SignalFunction::A, SignalFunction::B, SignalFunction::C, SignalFunction::D, SignalFunction::E}) {
        CHECK(parse_function(function_name(f)) == f);
    }
    CHECK(parse_function("a") == SignalFunction::A);
    CHECK(!parse_function("F"));
}

TEST_CASE("regression functions at reference points") {
    CHECK(signal_logit(SignalFunction::A, 0.0, 0.0) == -3.0);
    CHECK(signal_logit(SignalFunction::A, 1.0, 1.0) == 0.0);
    CHECK(signal_logit(SignalFunction::B, 1.0, 0.0) == doctest::Approx(0.25));
    CHECK(signal_logit(SignalFunction::C, 0.5, 0.0) == 0.0);
    CHECK(signal_logit(SignalFunction::D, 1.0, 1.0) == doctest::Approx(-2.25));
    CHECK(signal_logit(SignalFunction::E, 0.3, -0.7) == -3.0);
}

TEST_CASE("simulation priors are valid mixtures") {
    for (int p = 1; p <= 4; ++p) {
        const auto prior = simulation_prior(p);
        CHECK_NOTHROW(prior.validate());
        CHECK(std::accumulate(prior.weight.begin(), prior.weight.end(), 0.0) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(simulation_prior(5), DomainError);
}

TEST_CASE("generated data follow the scenario") {
    Scenario sc;
    sc.function = SignalFunction::E;
    sc.n = 50000;
    Rng rng(1);
    const auto data = generate(sc, rng);
    CHECK(data.table.size() == 50000);
    CHECK(data.table.X.cols() == 2);
    CHECK(data.table.X.minCoeff() >= -1.0);
    CHECK(data.table.X.maxCoeff() <= 1.0);
    const double frac = std::accumulate(data.truth.begin(), data.truth.end(), 0.0) / 50000.0;
    CHECK(frac == doctest::Approx(logistic(-3.0)).epsilon(0.08));
    // null z-values are standard normal
    double s = 0, ss = 0, m = 0;
    for (std::size_t i = 0; i < data.truth.size(); ++i) {
        if (data.truth[i]) continue;
        s += data.table.z[i];
        ss += data.table.z[i] * data.table.z[i];
        ++m;
    }
    CHECK(std::abs(s / m) < 0.02);
    CHECK(ss / m == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("scenario labels and validation") {
    Scenario sc;
    sc.prior = 4;
    sc.function = SignalFunction::C;
    CHECK(sc.label() == "4C");
    sc.x_hi = sc.x_lo;
    CHECK_THROWS_AS(sc.validate(), DomainError);
}

TEST_CASE("score") {
    const std::vector<int> truth{1, 0, 1, 0, 1};
    const std::vector<std::size_t> d{0, 1, 2};
    const auto s = score(d, truth);
    CHECK(s.fdr == doctest::Approx(1.0 / 3.0));
    CHECK(s.tpr == doctest::Approx(2.0 / 3.0));
    const std::vector<std::size_t> none;
    CHECK(score(none, truth).fdr == 0.0);
    CHECK(score(none, truth).tpr == 0.0);
    const std::vector<std::size_t> bad{7};
    CHECK_THROWS_AS(score(bad, truth), DomainError);
}

TEST_CASE("replication seeds are distinct across cells and replications") {
    std::set<std::uint64_t> seen;
    for (int p = 1; p <= 4; ++p) {
        for (auto f : {SignalFunction::A, SignalFunction::B, SignalFunction::C, SignalFunction::D, SignalFunction::E}) {
            Scenario sc;
            sc.prior = p;
            sc.function = f;
            for (int r = 0; r < 100; ++r) seen.insert(replication_seed(7, sc, r));
        }
    }
    CHECK(seen.size() == 2000);
}

TEST_CASE("benchmark results do not depend on the thread count") {
    BenchmarkConfig cfg;
    for (auto f : {SignalFunction::A, SignalFunction::E}) {
        Scenario sc;
        sc.function = f;
        sc.n = 2000;
        cfg.scenarios.push_back(sc);
    }
    cfg.methods = {Method::BH, Method::TwoGroups};
    cfg.replications = 3;
    cfg.seed = 5;
    cfg.threads = 1;
    const auto serial = run_benchmark(cfg);
    cfg.threads = 4;
    const auto parallel = run_benchmark(cfg);
    REQUIRE(serial.size() == 2);
    for (std::size_t c = 0; c < serial.size(); ++c) {
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            CHECK(serial[c].methods[m].fdr == parallel[c].methods[m].fdr);
            CHECK(serial[c].methods[m].tpr == parallel[c].methods[m].tpr);
            CHECK(serial[c].methods[m].fdr.size() == 3);
        }
    }
    REQUIRE(serial[0].find(Method::BH) != nullptr);
    CHECK(serial[0].find(Method::EB) == nullptr);

    std::ostringstream csv;
    write_benchmark_csv(csv, serial);
    const std::string text = csv.str();
    CHECK(text.rfind("prior,function,method,replication,fdr,tpr\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 2 * 3);

    std::ostringstream md;
    write_benchmark_markdown(md, serial, cfg.methods, 0.1);
    CHECK(md.str().find("| 1 | A |") != std::string::npos);
}

TEST_CASE("method result summaries") {
    MethodResult r;
    r.fdr = {0.2, 0.22, 0.18, 0.21};
    r.tpr = {0.3, 0.3, 0.3, 0.3};
    CHECK(r.mean_fdr() == doctest::Approx(0.2025));
    CHECK(r.mean_tpr() == doctest::Approx(0.3));
    CHECK(r.fdr_pvalue(0.1) < 0.01);
    CHECK(r.fdr_pvalue(0.3) > 0.99);
}

TEST_CASE("each method runs on a small data set") {
    Scenario sc;
    sc.n = 3000;
    sc.seed = 3;
    Rng rng(3);
    const auto data = generate(sc, rng);
    MethodOptions opts;
    opts.gibbs.iterations = 300;
    opts.gibbs.burn_in = 100;
    for (auto m : {Method::BH, Method::TwoGroups, Method::EBm, Method::EB, Method::FB}) {
        CAPTURE(method_name(m));
        const auto d = run_method(m, data.table, 0.1, opts, 11);
        const auto s = score(d, data.truth);
        CHECK(s.fdr < 0.35);
        CHECK(std::is_sorted(d.begin(), d.end()));
    }
}

}  // TEST_SUITE

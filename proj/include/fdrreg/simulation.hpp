#pragma once

// Benchmark scenarios (regression functions A-E crossed with priors 1-4),
// the five competing methods, and realized FDR / TPR summaries.

#include "fdrreg/basis_splines.hpp"
#include "fdrreg/deconvolution.hpp"
#include "fdrreg/em_fdrr.hpp"
#include "fdrreg/gibbs.hpp"
#include "fdrreg/model_core.hpp"
#include "fdrreg/predictive_recursion.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fdrreg {

enum class SignalFunction { A, B, C, D, E };

std::string_view function_name(SignalFunction f);
std::optional<SignalFunction> parse_function(std::string_view name);

// Prior log-odds s(x1, x2).
double signal_logit(SignalFunction f, double x1, double x2);

// Effect-size mixture for prior 1..4 (variances, not standard deviations).
GaussianMixturePrior simulation_prior(int prior_id);

struct Scenario {
    SignalFunction function = SignalFunction::A;
    int prior = 1;
    std::size_t n = 10000;
    double q = 0.10;
    std::uint64_t seed = 0;
    // Covariates are uniform on [x_lo, x_hi]^2.
    double x_lo = -1.0;
    double x_hi = 1.0;

    void validate() const;
    std::string label() const;  // e.g. "1A"
};

struct SimulatedData {
    TestTable table;
    std::vector<int> truth;  // 1 for signals
};

SimulatedData generate(const Scenario& scenario, Rng& rng);

struct Score {
    double fdr = 0.0;
    double tpr = 0.0;
};

Score score(std::span<const std::size_t> discoveries, std::span<const int> truth);

struct MethodOptions {
    BasisSpec basis;  // five interior knots per covariate by default
    PRConfig pr;
    EMConfig em;
    GibbsConfig gibbs = benchmark_gibbs();

    static GibbsConfig benchmark_gibbs();
};

// Discoveries of one method at level q under the theoretical N(0, 1) null.
std::vector<std::size_t> run_method(Method method, const TestTable& data, double q, const MethodOptions& options,
                                    std::uint64_t seed);

struct MethodResult {
    Method method = Method::EB;
    std::vector<double> fdr;  // per successful replication
    std::vector<double> tpr;
    std::vector<std::size_t> discoveries;
    std::vector<int> replication;  // replication index of each entry
    int failures = 0;
    std::vector<std::string> errors;

    double mean_fdr() const;
    double mean_tpr() const;
    // One-sided t-test of the per-replication FDR against q.
    double fdr_pvalue(double q) const;
};

struct CellResult {
    Scenario scenario;
    std::vector<MethodResult> methods;

    const MethodResult* find(Method m) const;
};

struct BenchmarkConfig {
    std::vector<Scenario> scenarios;
    std::vector<Method> methods;
    int replications = 20;
    int threads = 1;
    std::uint64_t seed = 0;
    MethodOptions options;
};

// Every (cell, replication) pair draws its data from a seed derived from the
// master seed, the cell and the replication index, so results do not depend
// on scheduling or thread count.
std::vector<CellResult> run_benchmark(const BenchmarkConfig& config);

std::uint64_t replication_seed(std::uint64_t master, const Scenario& scenario, int replication);

// Columns: prior, function, method, replication, fdr, tpr.
void write_benchmark_csv(std::ostream& out, std::span<const CellResult> cells);

// Percentages laid out as prior/function rows and FDR then TPR per method;
// FDR entries significantly above q (one-sided t-test, p < 0.05) are starred.
void write_benchmark_markdown(std::ostream& out, std::span<const CellResult> cells, std::span<const Method> methods,
                              double q);

}  // namespace fdrreg

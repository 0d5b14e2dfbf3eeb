#pragma once

// Subcommands behind the fdrreg executable. Each returns a process exit code:
// 0 success, 2 malformed input, 3 fit or check failure.

#include "fdrreg/basis_splines.hpp"
#include "fdrreg/model_core.hpp"
#include "fdrreg/null_estimation.hpp"
#include "fdrreg/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdrreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitFit = 3;

struct FitOptions {
    std::string input;
    std::string output_dir = ".";
    std::string resume;  // path to a previous fit.json
    Method method = Method::EB;
    NullMethod null_method = NullMethod::Theoretical;
    double central_fraction = 1.0 / 3.0;
    double q = 0.10;
    int knots = 5;
    std::vector<int> df_grid;
    std::optional<std::uint64_t> seed;
    int iterations = 10000;
    int burn_in = 2000;
    int thin = 1;
    int components = 0;
    bool plot = true;
};

// Everything needed to recompute per-test results for BH, 2G, EBm and EB.
struct ModelState {
    Method method = Method::EB;
    NullModel null;
    std::string null_method = "theoretical";
    double q = 0.10;
    double c_hat = 0.0;
    Eigen::VectorXd beta;
    bool intercept = true;
    std::vector<SplineBasis> bases;
    std::vector<std::string> covariates;
    GridDensity density;  // f1 for EB, the marginal density for 2G and EBm
};

struct Predictions {
    std::vector<double> w;
    std::vector<double> localfdr;
    std::vector<double> priorprob;
    std::vector<int> significant;
};

Predictions predict(const ModelState& state, const TestTable& table);

void save_state(const ModelState& state, const std::string& path, const std::string& config_json);
ModelState load_state(const std::string& path);

void write_results(const std::string& path, const TestTable& table, const Predictions& pred);

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err);

struct SimulateOptions {
    std::vector<int> priors{1};
    std::vector<SignalFunction> functions{SignalFunction::A};
    std::vector<Method> methods{Method::BH, Method::TwoGroups, Method::EBm, Method::EB};
    int replications = 20;
    std::size_t n = 10000;
    double q = 0.10;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string output_dir;
    int fb_iterations = 4000;
    int fb_burn_in = 1000;
    double x_lo = -1.0;
    double x_hi = 1.0;
};

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct NullCheckOptions {
    std::string input;  // empty: simulate N(mu, sigma^2)
    std::size_t n = 100000;
    double mu = 0.0;
    double sigma = 1.0;
    double central_fraction = 1.0 / 3.0;
    std::optional<std::uint64_t> seed;
};

int cmd_null_check(const NullCheckOptions& options, std::ostream& out, std::ostream& err);

struct PgTestOptions {
    long draws = 1'000'000;
    std::vector<double> c_values{0.0, 1.0, 2.0, 4.0};
    double tolerance = 1e-3;
    std::optional<std::uint64_t> seed;
    double fault_scale = 1.0;  // test hook: multiplies every draw
};

int cmd_pg_test(const PgTestOptions& options, std::ostream& out, std::ostream& err);

// Uses the given seed or draws one from the system entropy source and reports it on `err`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err);

}  // namespace fdrreg::cli

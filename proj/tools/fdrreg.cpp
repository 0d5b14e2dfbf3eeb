// fdrreg: false-discovery-rate regression from the command line.

#include "fdrreg/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

using namespace fdrreg;
using namespace fdrreg::cli;

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Method> parse_methods(const std::string& s) {
    std::vector<Method> out;
    for (const auto& tok : split(s)) {
        const auto m = parse_method(tok);
        if (!m) throw CLI::ValidationError("--methods", "unknown method '" + tok + "'");
        out.push_back(*m);
    }
    return out;
}

int default_threads() {
    if (const char* env = std::getenv("FDRREG_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"False-discovery-rate regression"};
    app.require_subcommand(1);

    FitOptions fit;
    std::string fit_method = "eb", fit_null = "theoretical", df_grid;
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a CSV of z-statistics and covariates");
    fit_cmd->add_option("-i,--input", fit.input, "CSV with a z column and optional covariate columns")->required();
    fit_cmd->add_option("-o,--out", fit.output_dir, "Output directory");
    fit_cmd->add_option("--method", fit_method, "bh, 2g, ebm, eb or fb");
    fit_cmd->add_option("--null", fit_null, "theoretical, mle or central");
    fit_cmd->add_option("--central-fraction", fit.central_fraction, "Fraction of z used by empirical nulls");
    fit_cmd->add_option("--q", fit.q, "Target FDR");
    fit_cmd->add_option("--knots", fit.knots, "Interior knots per covariate");
    fit_cmd->add_option("--df-grid", df_grid, "Comma-separated df candidates chosen by AIC");
    auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "Random seed");
    fit_cmd->add_option("--iterations", fit.iterations, "Gibbs sweeps (fb)");
    fit_cmd->add_option("--burn-in", fit.burn_in, "Gibbs burn-in (fb)");
    fit_cmd->add_option("--thin", fit.thin, "Gibbs thinning (fb)");
    fit_cmd->add_option("--components", fit.components, "Mixture components (fb, 0 = AIC)");
    fit_cmd->add_option("--resume", fit.resume, "Recompute results from a saved fit.json");
    fit_cmd->add_flag("!--no-plot", fit.plot, "Skip diagnostics.svg");

    SimulateOptions sim;
    std::string priors = "1", functions = "A", methods = "bh,2g,ebm,eb";
    std::uint64_t sim_seed = 0;
    bool full = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Run the benchmark simulation");
    sim_cmd->add_option("--prior", priors, "Comma-separated priors (1-4) or 'all'");
    sim_cmd->add_option("--fn", functions, "Comma-separated functions (A-E) or 'all'");
    sim_cmd->add_option("--methods", methods, "Comma-separated methods");
    sim_cmd->add_option("--reps", sim.replications, "Replications per cell");
    sim_cmd->add_flag("--full", full, "Use 100 replications");
    sim_cmd->add_option("--n", sim.n, "Tests per data set");
    sim_cmd->add_option("--q", sim.q, "Target FDR");
    auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "Master seed");
    auto* sim_threads = sim_cmd->add_option("--threads", sim.threads, "Worker threads");
    sim_cmd->add_option("-o,--out", sim.output_dir, "Directory for benchmark.csv and table.md");
    sim_cmd->add_option("--fb-iterations", sim.fb_iterations, "Gibbs sweeps for fb");
    sim_cmd->add_option("--fb-burn-in", sim.fb_burn_in, "Gibbs burn-in for fb");
    sim_cmd->add_option("--x-min", sim.x_lo, "Lower covariate bound");
    sim_cmd->add_option("--x-max", sim.x_hi, "Upper covariate bound");

    NullCheckOptions nc;
    std::uint64_t nc_seed = 0;
    auto* nc_cmd = app.add_subcommand("null-check", "Compare theoretical and empirical null estimates");
    nc_cmd->add_option("-i,--input", nc.input, "CSV with a z column (default: simulate)");
    nc_cmd->add_option("--n", nc.n, "Simulated sample size");
    nc_cmd->add_option("--mu", nc.mu, "Simulated null mean");
    nc_cmd->add_option("--sigma", nc.sigma, "Simulated null standard deviation");
    nc_cmd->add_option("--central-fraction", nc.central_fraction, "Fraction of z used by empirical nulls");
    auto* nc_seed_opt = nc_cmd->add_option("--seed", nc_seed, "Random seed");

    PgTestOptions pg;
    std::uint64_t pg_seed = 0;
    auto* pg_cmd = app.add_subcommand("pg-test", "Monte Carlo moment checks of the Polya-Gamma sampler");
    pg_cmd->add_option("--draws", pg.draws, "Draws per c value");
    pg_cmd->add_option("--tolerance", pg.tolerance, "Allowed absolute error of the mean");
    auto* pg_seed_opt = pg_cmd->add_option("--seed", pg_seed, "Random seed");
    pg_cmd->add_option("--fault-scale", pg.fault_scale, "Test hook: scale every draw")->group("");

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) {
            const auto m = parse_method(fit_method);
            if (!m) throw CLI::ValidationError("--method", "unknown method '" + fit_method + "'");
            fit.method = *m;
            const auto nm = parse_null_method(fit_null);
            if (!nm) throw CLI::ValidationError("--null", "unknown null '" + fit_null + "'");
            fit.null_method = *nm;
            for (const auto& tok : split(df_grid)) fit.df_grid.push_back(std::stoi(tok));
            if (*fit_seed_opt) fit.seed = fit_seed;
        }
        if (sim_cmd->parsed()) {
            sim.priors.clear();
            for (const auto& tok : split(priors == "all" ? "1,2,3,4" : priors)) sim.priors.push_back(std::stoi(tok));
            sim.functions.clear();
            for (const auto& tok : split(functions == "all" ? "A,B,C,D,E" : functions)) {
                const auto f = parse_function(tok);
                if (!f) throw CLI::ValidationError("--fn", "unknown function '" + tok + "'");
                sim.functions.push_back(*f);
            }
            sim.methods = parse_methods(methods);
            if (full) sim.replications = 100;
            if (*sim_seed_opt) sim.seed = sim_seed;
            if (!*sim_threads) sim.threads = default_threads();
        }
        if (*nc_seed_opt) nc.seed = nc_seed;
        if (*pg_seed_opt) pg.seed = pg_seed;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }

    if (fit_cmd->parsed()) return cmd_fit(fit, std::cout, std::cerr);
    if (sim_cmd->parsed()) return cmd_simulate(sim, std::cout, std::cerr);
    if (nc_cmd->parsed()) return cmd_null_check(nc, std::cout, std::cerr);
    return cmd_pg_test(pg, std::cout, std::cerr);
}

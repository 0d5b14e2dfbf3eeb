#include "fdrreg/cli/commands.hpp"

#include "fdrreg/cli/io.hpp"
#include "fdrreg/cli/svg.hpp"
#include "fdrreg/diagnostics.hpp"
#include "fdrreg/em_fdrr.hpp"
#include "fdrreg/errors.hpp"
#include "fdrreg/gibbs.hpp"
#include "fdrreg/marginal_density.hpp"
#include "fdrreg/polya_gamma.hpp"
#include "fdrreg/predictive_recursion.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

namespace fdrreg::cli {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json basis_to_json(const SplineBasis& b) {
    return {{"lower", b.lower()}, {"upper", b.upper()}, {"degree", b.degree()}, {"interior_knots", b.interior_knots()}};
}

SplineBasis basis_from_json(const json& j) {
    return SplineBasis(j.at("lower").get<double>(), j.at("upper").get<double>(),
                       j.at("interior_knots").get<std::vector<double>>(), j.at("degree").get<int>());
}

std::vector<double> sequence(double lo, double hi, std::size_t n) { return linspace(lo, hi, n); }

}  // namespace

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
    if (seed) return *seed;
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << s << '\n';
    return s;
}

Predictions predict(const ModelState& state, const TestTable& table) {
    const std::size_t n = table.size();
    Predictions p;
    p.w.assign(n, NAN);
    p.localfdr.assign(n, NAN);
    p.priorprob.assign(n, NAN);
    p.significant.assign(n, 0);
    if (state.method == Method::BH) {
        for (std::size_t i : benjamini_hochberg(table.z, state.null, state.q)) p.significant[i] = 1;
        return p;
    }
    if (state.method == Method::FB) throw DomainError("fully Bayes results cannot be recomputed from a saved state");

    Eigen::VectorXd lin;
    if (state.method == Method::TwoGroups) {
        lin = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), state.beta(0));
    } else {
        const DesignMatrix design = design_matrix_from_bases(table.X, state.bases, state.intercept, state.covariates);
        if (design.cols() != state.beta.size()) throw DomainError("saved coefficients do not match the design");
        lin = design.matrix * state.beta;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double z = table.z[i];
        const double s = lin(static_cast<Eigen::Index>(i));
        switch (state.method) {
            case Method::TwoGroups: {
                const double fhat = state.density(z);
                const double f0 = state.null.pdf(z);
                const double lfdr = fhat > 0.0 ? std::clamp((1.0 - state.c_hat) * f0 / fhat, 0.0, 1.0) : 1.0;
                p.w[i] = 1.0 - lfdr;
                p.priorprob[i] = state.c_hat;
                break;
            }
            case Method::EBm:
                p.priorprob[i] = logistic(s);
                p.w[i] = ebm_weight(p.priorprob[i], state.null.pdf(z), state.density(z), state.c_hat);
                break;
            default: {
                p.priorprob[i] = logistic(s);
                const double f1 = state.density(z);
                p.w[i] = f1 > 0.0 ? logistic(s + std::log(f1) - state.null.logpdf(z)) : 0.0;
            }
        }
        p.localfdr[i] = 1.0 - p.w[i];
    }
    for (std::size_t i : bayes_fdr_select(p.localfdr, state.q)) p.significant[i] = 1;
    return p;
}

void save_state(const ModelState& state, const std::string& path, const std::string& config_json) {
    json j;
    j["method"] = std::string(method_name(state.method));
    j["null"] = {{"mu", state.null.mu}, {"sigma2", state.null.sigma2}, {"sigma", state.null.sigma()}, {"method", state.null_method}};
    j["q"] = state.q;
    j["c_hat"] = state.c_hat;
    j["beta"] = std::vector<double>(state.beta.data(), state.beta.data() + state.beta.size());
    j["design"] = {{"intercept", state.intercept}, {"covariates", state.covariates}, {"bases", json::array()}};
    for (const auto& b : state.bases) j["design"]["bases"].push_back(basis_to_json(b));
    if (!state.density.empty()) {
        j["density"] = {{"kind", state.method == Method::EB || state.method == Method::FB ? "f1" : "marginal"},
                        {"grid", state.density.grid()},
                        {"values", state.density.values()}};
    }
    j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    write_text(path, j.dump(2) + "\n");
}

ModelState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    json j;
    try {
        in >> j;
        ModelState s;
        const auto m = parse_method(lower(j.at("method").get<std::string>()));
        if (!m) throw InputError(path + ": unknown method");
        s.method = *m;
        s.null.mu = j.at("null").at("mu").get<double>();
        s.null.sigma2 = j.at("null").at("sigma2").get<double>();
        s.null_method = j.at("null").value("method", "theoretical");
        s.q = j.at("q").get<double>();
        s.c_hat = j.at("c_hat").get<double>();
        const auto beta = j.at("beta").get<std::vector<double>>();
        s.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
        s.intercept = j.at("design").at("intercept").get<bool>();
        s.covariates = j.at("design").at("covariates").get<std::vector<std::string>>();
        for (const auto& b : j.at("design").at("bases")) s.bases.push_back(basis_from_json(b));
        if (j.contains("density")) {
            s.density = GridDensity(j["density"].at("grid").get<std::vector<double>>(),
                                    j["density"].at("values").get<std::vector<double>>());
        }
        return s;
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_results(const std::string& path, const TestTable& table, const Predictions& pred) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_csv_row(out, {"id", "z", "localfdr", "w", "priorprob", "significant"});
    for (std::size_t i = 0; i < table.size(); ++i) {
        write_csv_row(out, {std::to_string(i + 1), format_double(table.z[i]), format_double(pred.localfdr[i]),
                            format_double(pred.w[i]), format_double(pred.priorprob[i]), std::to_string(pred.significant[i])});
    }
}

namespace {

std::string diagnostics_plot(const TestTable& table, const ModelState& state, const Predictions& pred,
                             const std::vector<GaussianMixturePrior>* mixture_draws) {
    const auto [mn, mx] = std::minmax_element(table.z.begin(), table.z.end());
    const std::vector<double> x = sequence(*mn, *mx, 400);
    double cbar = 0.0;
    std::size_t counted = 0;
    for (double c : pred.priorprob) {
        if (std::isfinite(c)) {
            cbar += c;
            ++counted;
        }
    }
    cbar = counted ? cbar / static_cast<double>(counted) : 0.0;
    Curve null_curve{x, {}, "#1f5fbf", "(1 - c) f0"};
    Curve alt_curve{x, {}, "#c0392b", "c f1"};
    for (double v : x) {
        null_curve.y.push_back((1.0 - cbar) * state.null.pdf(v));
        double f1 = 0.0;
        switch (state.method) {
            case Method::EB: f1 = state.density(v); break;
            case Method::TwoGroups:
            case Method::EBm:
                f1 = state.c_hat > 0.0 ? std::max(0.0, state.density(v) - (1.0 - state.c_hat) * state.null.pdf(v)) / state.c_hat
                                       : 0.0;
                break;
            case Method::FB:
                if (mixture_draws && !mixture_draws->empty()) {
                    const std::size_t step = std::max<std::size_t>(1, mixture_draws->size() / 200);
                    std::size_t used = 0;
                    for (std::size_t k = 0; k < mixture_draws->size(); k += step, ++used) {
                        f1 += (*mixture_draws)[k].predictive_pdf(v, state.null);
                    }
                    f1 /= static_cast<double>(used);
                }
                break;
            default: break;
        }
        alt_curve.y.push_back(cbar * f1);
    }
    std::vector<Curve> curves{null_curve};
    if (state.method != Method::BH) curves.push_back(alt_curve);
    return histogram_svg(table.z, curves, "z histogram, method " + std::string(method_name(state.method)));
}

}  // namespace

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
    TestTable table;
    try {
        if (!(o.q > 0.0 && o.q < 1.0)) throw InputError("--q must lie in (0, 1)");
        if (o.input.empty()) throw InputError("--input is required");
        if (!std::filesystem::exists(o.input)) throw InputError("input file " + o.input + " does not exist");
        table = read_test_table(o.input);
        table.validate();
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    std::filesystem::create_directories(o.output_dir);
    const std::filesystem::path dir(o.output_dir);

    if (!o.resume.empty()) {
        try {
            const ModelState state = load_state(o.resume);
            if (state.method != Method::BH && state.method != Method::TwoGroups && state.covariates != table.names) {
                throw InputError("input covariate columns do not match the saved fit");
            }
            const Predictions pred = predict(state, table);
            write_results((dir / "results.csv").string(), table, pred);
            if (o.plot) write_text(dir / "diagnostics.svg", diagnostics_plot(table, state, pred, nullptr));
            out << "resumed " << method_name(state.method) << " fit from " << o.resume << ": "
                << std::count(pred.significant.begin(), pred.significant.end(), 1) << " discoveries at q=" << state.q << '\n';
            return kExitOk;
        } catch (const InputError& e) {
            err << "error: " << e.what() << '\n';
            return kExitInput;
        } catch (const std::exception& e) {
            err << "error: resume failed: " << e.what() << '\n';
            return kExitFit;
        }
    }

    const std::uint64_t seed = resolve_seed(o.seed, err);
    json config = {{"input", o.input},          {"method", std::string(method_name(o.method))},
                   {"null", std::string(null_method_name(o.null_method))},
                   {"central_fraction", o.central_fraction},
                   {"q", o.q},                   {"knots", o.knots},
                   {"df_grid", o.df_grid},       {"seed", seed}};
    try {
        EmpiricalNullConfig nc;
        nc.method = o.null_method;
        nc.central_fraction = o.central_fraction;
        ModelState state;
        state.method = o.method;
        state.null = estimate_null(table.z, nc);
        state.null_method = std::string(null_method_name(o.null_method));
        state.q = o.q;

        Predictions pred;
        const std::vector<GaussianMixturePrior>* draws = nullptr;
        PosteriorSamples samples;
        if (o.method == Method::BH) {
            state.beta = Eigen::VectorXd();
            state.intercept = false;
            pred = predict(state, table);
        } else if (o.method == Method::TwoGroups) {
            const MarginalFit marginal = fit_marginal_density(table.z);
            state.c_hat = estimate_signal_fraction(marginal.density, state.null);
            state.beta = Eigen::VectorXd::Constant(1, logit(state.c_hat));
            state.density = marginal.density;
            pred = predict(state, table);
        } else {
            BasisSpec spec;
            spec.interior_knots = o.knots;
            EMConfig em;
            PRConfig pr;
            pr.seed = derive_seed(seed, 1);
            GridDensity f1;
            GridDensity marginal;
            if (o.method == Method::EB || (o.method == Method::FB && !o.df_grid.empty())) {
                const PRResult prr = pr_fit(table.z, state.null, pr);
                f1 = f1_from_measure(prr.measure, state.null);
                state.c_hat = prr.c_hat;
            }
            if (o.method == Method::EBm) {
                marginal = fit_marginal_density(table.z).density;
                state.c_hat = estimate_signal_fraction_central(marginal, state.null);
            }
            if (!o.df_grid.empty() && table.num_covariates() > 0) {
                std::vector<BasisSpec> cands;
                for (int df : o.df_grid) cands.push_back(BasisSpec::with_df(df));
                const DesignFitter fitter = [&](const DesignMatrix& d) {
                    if (o.method == Method::EBm) return ebm_fit(table.z, d.matrix, state.null, marginal, state.c_hat, em).loglik;
                    return em_fit(table.z, d.matrix, state.null, f1, em, state.c_hat).loglik;
                };
                const AicSelection sel = aic_select_df(table.X, cands, fitter);
                for (const auto& c : sel.candidates) {
                    if (c.failed) err << "warning: df candidate skipped: " << c.error << '\n';
                }
                spec = sel.best;
                config["selected_interior_knots"] = spec.interior_knots;
            }
            const DesignMatrix design = design_matrix(table.X, spec, table.names);
            state.bases = design.bases;
            state.intercept = design.intercept;
            state.covariates = table.names;
            RegressionFit fit;
            if (o.method == Method::EB) {
                fit = em_fit(table.z, design.matrix, state.null, f1, em, state.c_hat);
                state.density = f1;
            } else if (o.method == Method::EBm) {
                fit = ebm_fit(table.z, design.matrix, state.null, marginal, state.c_hat, em);
                state.density = marginal;
            }
            if (o.method == Method::FB) {
                GibbsConfig g;
                g.iterations = o.iterations;
                g.burn_in = o.burn_in;
                g.thin = o.thin;
                g.components = o.components;
                g.seed = derive_seed(seed, 2);
                samples = gibbs_fit(table.z, design.matrix, state.null, g);
                state.beta = samples.beta_mean;
                state.c_hat = 0.0;
                pred.w = samples.w;
                pred.localfdr = samples.localfdr();
                pred.priorprob.assign(table.size(), 0.0);
                for (Eigen::Index r = 0; r < samples.beta_draws.rows(); ++r) {
                    const Eigen::VectorXd lin = design.matrix * samples.beta_draws.row(r).transpose();
                    for (std::size_t i = 0; i < table.size(); ++i) pred.priorprob[i] += logistic(lin(static_cast<Eigen::Index>(i)));
                }
                for (double& c : pred.priorprob) c /= static_cast<double>(samples.beta_draws.rows());
                pred.significant.assign(table.size(), 0);
                for (std::size_t i : bayes_fdr_select(pred.localfdr, o.q)) pred.significant[i] = 1;
                draws = &samples.mixture_draws;
                config["iterations"] = o.iterations;
                config["burn_in"] = o.burn_in;
                config["thin"] = o.thin;
                config["components"] = samples.components;
                json ess = json::array();
                for (Eigen::Index k = 0; k < samples.beta_ess.size(); ++k) ess.push_back(samples.beta_ess(k));
                config["beta_ess"] = ess;
            } else {
                state.beta = fit.beta;
                config["em_iterations"] = fit.iterations;
                config["em_converged"] = fit.converged;
                if (!fit.converged) err << "warning: EM stopped at the iteration limit\n";
                pred = predict(state, table);
            }
        }

        write_results((dir / "results.csv").string(), table, pred);
        save_state(state, (dir / "fit.json").string(), config.dump());
        if (o.plot) write_text(dir / "diagnostics.svg", diagnostics_plot(table, state, pred, draws));
        out << method_name(o.method) << ": null mu=" << state.null.mu << " sigma=" << state.null.sigma() << ", "
            << std::count(pred.significant.begin(), pred.significant.end(), 1) << " discoveries at q=" << o.q << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "error: fit failed: " << e.what() << '\n';
        return kExitFit;
    }
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
    BenchmarkConfig cfg;
    try {
        if (o.replications < 1) throw InputError("--reps must be positive");
        if (!(o.q > 0.0 && o.q < 1.0)) throw InputError("--q must lie in (0, 1)");
        for (int p : o.priors) {
            for (SignalFunction f : o.functions) {
                Scenario s;
                s.prior = p;
                s.function = f;
                s.n = o.n;
                s.q = o.q;
                s.x_lo = o.x_lo;
                s.x_hi = o.x_hi;
                s.validate();
                cfg.scenarios.push_back(s);
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    cfg.methods = o.methods;
    cfg.replications = o.replications;
    cfg.threads = o.threads;
    cfg.seed = resolve_seed(o.seed, err);
    cfg.options.gibbs.iterations = o.fb_iterations;
    cfg.options.gibbs.burn_in = o.fb_burn_in;

    std::vector<CellResult> cells;
    try {
        cells = run_benchmark(cfg);
    } catch (const std::exception& e) {
        err << "error: benchmark failed: " << e.what() << '\n';
        return kExitFit;
    }
    bool wholly_failed = false;
    for (const auto& cell : cells) {
        for (const auto& r : cell.methods) {
            if (r.failures > 0) {
                err << "warning: " << cell.scenario.label() << ' ' << method_name(r.method) << ": " << r.failures
                    << " failed replication(s), first: " << r.errors.front() << '\n';
            }
            if (r.fdr.empty()) wholly_failed = true;
        }
    }
    write_benchmark_markdown(out, cells, o.methods, o.q);
    if (!o.output_dir.empty()) {
        std::filesystem::create_directories(o.output_dir);
        std::ofstream csv(std::filesystem::path(o.output_dir) / "benchmark.csv", std::ios::binary);
        write_benchmark_csv(csv, cells);
        std::ofstream md(std::filesystem::path(o.output_dir) / "table.md", std::ios::binary);
        write_benchmark_markdown(md, cells, o.methods, o.q);
    }
    return wholly_failed ? kExitFit : kExitOk;
}

int cmd_null_check(const NullCheckOptions& o, std::ostream& out, std::ostream& err) {
    std::vector<double> z;
    try {
        if (!o.input.empty()) {
            z = read_test_table(o.input).z;
        } else {
            if (!(o.sigma > 0.0)) throw InputError("--sigma must be positive");
            Rng rng(derive_seed(resolve_seed(o.seed, err), 0));
            std::normal_distribution<double> d(o.mu, o.sigma);
            z.resize(o.n);
            for (double& v : z) v = d(rng);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %12s %12s\n", "null", "mu", "sigma");
    out << line;
    int status = kExitOk;
    for (NullMethod m : {NullMethod::Theoretical, NullMethod::MLE, NullMethod::CentralMatching}) {
        EmpiricalNullConfig cfg;
        cfg.method = m;
        cfg.central_fraction = o.central_fraction;
        try {
            const NullModel nm = estimate_null(z, cfg);
            std::snprintf(line, sizeof line, "%-12s %12.5f %12.5f\n", std::string(null_method_name(m)).c_str(), nm.mu, nm.sigma());
            out << line;
        } catch (const std::exception& e) {
            err << "error: " << null_method_name(m) << ": " << e.what() << '\n';
            status = kExitFit;
        }
    }
    return status;
}

int cmd_pg_test(const PgTestOptions& o, std::ostream& out, std::ostream& err) {
    if (o.draws < 1) {
        err << "error: --draws must be positive\n";
        return kExitInput;
    }
    const std::uint64_t seed = resolve_seed(o.seed, err);
    const PolyaGammaSampler sampler;
    bool all_pass = true;
    char line[160];
    std::snprintf(line, sizeof line, "%8s %12s %12s %12s  %s\n", "c", "mean", "expected", "abs.diff", "result");
    out << line;
    for (std::size_t k = 0; k < o.c_values.size(); ++k) {
        const double c = o.c_values[k];
        Rng rng(derive_seed(seed, k));
        double sum = 0.0;
        for (long i = 0; i < o.draws; ++i) sum += o.fault_scale * sampler.draw(c, rng);
        const double mean = sum / static_cast<double>(o.draws);
        const double expected = pg1_mean(c);
        const bool pass = std::abs(mean - expected) <= o.tolerance;
        all_pass = all_pass && pass;
        std::snprintf(line, sizeof line, "%8.3f %12.6f %12.6f %12.6f  %s\n", c, mean, expected, std::abs(mean - expected),
                      pass ? "PASS" : "FAIL");
        out << line;
    }
    return all_pass ? kExitOk : kExitFit;
}

}  // namespace fdrreg::cli

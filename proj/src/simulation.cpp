#include "fdrreg/simulation.hpp"

#include "fdrreg/diagnostics.hpp"
#include "fdrreg/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <thread>

namespace fdrreg {

std::string_view function_name(SignalFunction f) {
    switch (f) {
        case SignalFunction::A: return "A";
        case SignalFunction::B: return "B";
        case SignalFunction::C: return "C";
        case SignalFunction::D: return "D";
        case SignalFunction::E: return "E";
    }
    return "?";
}

std::optional<SignalFunction> parse_function(std::string_view name) {
    if (name.size() != 1) return std::nullopt;
    switch (name[0]) {
        case 'A': case 'a': return SignalFunction::A;
        case 'B': case 'b': return SignalFunction::B;
        case 'C': case 'c': return SignalFunction::C;
        case 'D': case 'd': return SignalFunction::D;
        case 'E': case 'e': return SignalFunction::E;
        default: return std::nullopt;
    }
}

double signal_logit(SignalFunction f, double x1, double x2) {
    switch (f) {
        case SignalFunction::A: return -3.0 + 1.5 * x1 + 1.5 * x2;
        case SignalFunction::B: return -3.25 + 3.5 * x1 * x1 - 3.5 * x2 * x2;
        case SignalFunction::C: return -1.5 * (x1 - 0.5) * (x1 - 0.5) - 5.0 * std::abs(x2);
        case SignalFunction::D: return -4.25 + 2.0 * x1 * x1 + 2.0 * x2 * x2 - 2.0 * x1 * x2;
        case SignalFunction::E: return -3.0;
    }
    return 0.0;
}

GaussianMixturePrior simulation_prior(int prior_id) {
    switch (prior_id) {
        case 1: return {{0.48, 0.04, 0.48}, {-2.0, 0.0, 2.0}, {1.0, 16.0, 1.0}};
        case 2: return {{0.4, 0.2, 0.4}, {-1.25, 0.0, 1.25}, {2.0, 4.0, 2.0}};
        case 3: return {{0.3, 0.4, 0.3}, {0.0, 0.0, 0.0}, {0.1, 1.0, 9.0}};
        case 4: return {{0.2, 0.3, 0.3, 0.2}, {-3.0, -1.5, 1.5, 3.0}, {0.01, 0.01, 0.01, 0.01}};
        default: throw DomainError("prior must be 1, 2, 3 or 4");
    }
}

void Scenario::validate() const {
    if (n < 1) throw DomainError("scenario needs at least one test");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    if (!(x_hi > x_lo)) throw DomainError("covariate range is empty");
    simulation_prior(prior);
}

std::string Scenario::label() const { return std::to_string(prior) + std::string(function_name(function)); }

SimulatedData generate(const Scenario& scenario, Rng& rng) {
    scenario.validate();
    const GaussianMixturePrior prior = simulation_prior(scenario.prior);
    std::uniform_real_distribution<double> ux(scenario.x_lo, scenario.x_hi);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    SimulatedData out;
    const auto n = static_cast<Eigen::Index>(scenario.n);
    out.table.z.resize(scenario.n);
    out.table.X.resize(n, 2);
    out.table.names = {"x1", "x2"};
    out.truth.resize(scenario.n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x1 = ux(rng);
        const double x2 = ux(rng);
        out.table.X(i, 0) = x1;
        out.table.X(i, 1) = x2;
        const auto k = static_cast<std::size_t>(i);
        out.truth[k] = u01(rng) < logistic(signal_logit(scenario.function, x1, x2)) ? 1 : 0;
        const double theta = out.truth[k] ? prior.sample(rng) : 0.0;
        out.table.z[k] = theta + noise(rng);
    }
    return out;
}

Score score(std::span<const std::size_t> discoveries, std::span<const int> truth) {
    std::size_t signals = 0;
    for (int t : truth) signals += t ? 1 : 0;
    std::size_t true_hits = 0;
    for (std::size_t i : discoveries) {
        if (i >= truth.size()) throw DomainError("discovery index out of range");
        true_hits += truth[i] ? 1 : 0;
    }
    Score s;
    const std::size_t false_hits = discoveries.size() - true_hits;
    s.fdr = static_cast<double>(false_hits) / static_cast<double>(std::max<std::size_t>(1, discoveries.size()));
    s.tpr = static_cast<double>(true_hits) / static_cast<double>(std::max<std::size_t>(1, signals));
    return s;
}

GibbsConfig MethodOptions::benchmark_gibbs() {
    GibbsConfig g;
    g.iterations = 4000;
    g.burn_in = 1000;
    return g;
}

std::vector<std::size_t> run_method(Method method, const TestTable& data, double q, const MethodOptions& options,
                                    std::uint64_t seed) {
    const NullModel null{0.0, 1.0};
    switch (method) {
        case Method::BH: return benjamini_hochberg(data.z, null, q);
        case Method::TwoGroups: return bayes_fdr_select(two_groups_fit(data.z, null).localfdr, q);
        default: break;
    }
    const DesignMatrix design = design_matrix(data.X, options.basis, data.names);
    switch (method) {
        case Method::EBm: return bayes_fdr_select(fit_ebm(data.z, design.matrix, null, options.em).localfdr, q);
        case Method::EB: {
            PRConfig pr = options.pr;
            pr.seed = derive_seed(seed, 1);
            return bayes_fdr_select(fit_eb(data.z, design.matrix, null, pr, options.em).fit.localfdr, q);
        }
        case Method::FB: {
            GibbsConfig g = options.gibbs;
            g.seed = derive_seed(seed, 2);
            return bayes_fdr_select(gibbs_fit(data.z, design.matrix, null, g).localfdr(), q);
        }
        default: throw DomainError("unknown method");
    }
}

double MethodResult::mean_fdr() const { return sample_mean(fdr); }
double MethodResult::mean_tpr() const { return sample_mean(tpr); }
double MethodResult::fdr_pvalue(double q) const { return one_sided_t_test(fdr, q).p_value; }

const MethodResult* CellResult::find(Method m) const {
    for (const auto& r : methods) {
        if (r.method == m) return &r;
    }
    return nullptr;
}

std::uint64_t replication_seed(std::uint64_t master, const Scenario& scenario, int replication) {
    const std::uint64_t cell = static_cast<std::uint64_t>(scenario.prior) * 16 + static_cast<std::uint64_t>(scenario.function);
    return derive_seed(derive_seed(master, cell), static_cast<std::uint64_t>(replication));
}

std::vector<CellResult> run_benchmark(const BenchmarkConfig& config) {
    if (config.replications < 1) throw DomainError("replications must be positive");
    if (config.methods.empty()) throw DomainError("no methods requested");
    for (const auto& s : config.scenarios) s.validate();

    struct Outcome {
        bool ok = false;
        Score score;
        std::size_t discoveries = 0;
        std::string error;
    };
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    const std::size_t nm = config.methods.size();
    const std::size_t tasks = config.scenarios.size() * reps;
    std::vector<Outcome> outcomes(tasks * nm);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const Scenario& sc = config.scenarios[t / reps];
            const int rep = static_cast<int>(t % reps);
            const std::uint64_t seed = replication_seed(config.seed, sc, rep);
            Rng rng(derive_seed(seed, 0));
            const SimulatedData data = generate(sc, rng);
            for (std::size_t m = 0; m < nm; ++m) {
                Outcome& o = outcomes[t * nm + m];
                try {
                    const auto disc = run_method(config.methods[m], data.table, sc.q, config.options, seed);
                    o.score = score(disc, data.truth);
                    o.discoveries = disc.size();
                    o.ok = true;
                } catch (const std::exception& e) {
                    o.error = e.what();
                }
            }
        }
    };
    const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(tasks)));
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<CellResult> cells;
    for (std::size_t c = 0; c < config.scenarios.size(); ++c) {
        CellResult cell;
        cell.scenario = config.scenarios[c];
        for (std::size_t m = 0; m < nm; ++m) {
            MethodResult r;
            r.method = config.methods[m];
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const Outcome& o = outcomes[(c * reps + rep) * nm + m];
                if (!o.ok) {
                    ++r.failures;
                    r.errors.push_back("replication " + std::to_string(rep) + ": " + o.error);
                    continue;
                }
                r.fdr.push_back(o.score.fdr);
                r.tpr.push_back(o.score.tpr);
                r.discoveries.push_back(o.discoveries);
                r.replication.push_back(static_cast<int>(rep));
            }
            cell.methods.push_back(std::move(r));
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

}  // namespace

void write_benchmark_csv(std::ostream& out, std::span<const CellResult> cells) {
    out << "prior,function,method,replication,fdr,tpr\n";
    for (const auto& cell : cells) {
        for (const auto& r : cell.methods) {
            for (std::size_t k = 0; k < r.fdr.size(); ++k) {
                out << cell.scenario.prior << ',' << function_name(cell.scenario.function) << ',' << method_name(r.method)
                    << ',' << r.replication[k] << ',' << fmt("%.17g", r.fdr[k]) << ',' << fmt("%.17g", r.tpr[k]) << '\n';
            }
        }
    }
}

void write_benchmark_markdown(std::ostream& out, std::span<const CellResult> cells, std::span<const Method> methods,
                              double q) {
    out << "| prior | s(x) |";
    for (Method m : methods) out << " FDR " << method_name(m) << " |";
    for (Method m : methods) out << " TPR " << method_name(m) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < 2 * methods.size(); ++i) out << "---:|";
    out << '\n';
    int last_prior = -1;
    for (const auto& cell : cells) {
        out << "| " << (cell.scenario.prior != last_prior ? std::to_string(cell.scenario.prior) : std::string()) << " | "
            << function_name(cell.scenario.function) << " |";
        last_prior = cell.scenario.prior;
        for (Method m : methods) {
            const MethodResult* r = cell.find(m);
            if (!r || r->fdr.empty()) {
                out << " - |";
                continue;
            }
            const bool star = r->fdr_pvalue(q) < 0.05;
            out << ' ' << (star ? "*" : "") << fmt("%.1f", 100.0 * r->mean_fdr()) << " |";
        }
        for (Method m : methods) {
            const MethodResult* r = cell.find(m);
            out << ' ' << (r && !r->tpr.empty() ? fmt("%.1f", 100.0 * r->mean_tpr()) : std::string("-")) << " |";
        }
        out << '\n';
    }
}

}  // namespace fdrreg

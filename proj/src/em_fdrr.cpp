#include "fdrreg/em_fdrr.hpp"

#include "fdrreg/errors.hpp"
#include "fdrreg/marginal_density.hpp"
#include "fdrreg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fdrreg {

void EMConfig::validate() const {
    if (max_iters < 1) throw DomainError("max_iters must be at least 1");
    if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be positive");
    if (!(ridge >= 0.0) || !(intercept_ridge >= 0.0)) throw DomainError("ridge precision must be non-negative");
    if (newton_max_steps < 1) throw DomainError("newton_max_steps must be at least 1");
}

Eigen::VectorXd penalty_vector(const Eigen::MatrixXd& Xd, const EMConfig& config) {
    Eigen::VectorXd p(Xd.cols());
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
        const bool constant = Xd.rows() > 0 && (Xd.col(j).array() == Xd(0, j)).all();
        p(j) = constant ? config.intercept_ridge : config.ridge;
    }
    return p;
}

double observed_loglik(std::span<const double> log_f0, std::span<const double> log_f1, const Eigen::VectorXd& linpred) {
    double acc = 0.0;
    for (std::size_t i = 0; i < log_f0.size(); ++i) {
        const double s = linpred(static_cast<Eigen::Index>(i));
        acc += log_add_exp(-log1p_exp(-s) + log_f1[i], -log1p_exp(s) + log_f0[i]);
    }
    return acc;
}

namespace {

void log_densities(std::span<const double> z, const NullModel& f0, const GridDensity& f1, std::vector<double>& lf0,
                   std::vector<double>& lf1) {
    lf0.resize(z.size());
    lf1.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        lf0[i] = f0.logpdf(z[i]);
        lf1[i] = std::log(f1(z[i]));
    }
}

double penalty_term(const Eigen::VectorXd& beta, const Eigen::VectorXd& penalty) {
    return 0.5 * (penalty.array() * beta.array().square()).sum();
}

Eigen::VectorXd initial_beta(const Eigen::MatrixXd& Xd, double initial_c) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(Xd.cols());
    const double c = std::clamp(initial_c, 1e-6, 1.0 - 1e-6);
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
        if (Xd.rows() > 0 && (Xd.col(j).array() == Xd(0, j)).all() && Xd(0, j) != 0.0) {
            beta(j) = logit(c) / Xd(0, j);
            break;
        }
    }
    return beta;
}

// Shared EM driver. `estep` fills w from the linear predictor; `objective`
// scores the current state for the trace and the stopping rule.
template <class EStep, class Objective>
RegressionFit run_em(const Eigen::MatrixXd& Xd, const EMConfig& config, double initial_c, Method method, EStep estep,
                     Objective objective) {
    config.validate();
    const Eigen::VectorXd penalty = penalty_vector(Xd, config);
    check_identifiable(Xd, penalty);

    RegressionFit fit;
    fit.method = method;
    fit.c_hat = initial_c;
    const std::size_t n = static_cast<std::size_t>(Xd.rows());
    fit.w.resize(n);

    Eigen::VectorXd beta = initial_beta(Xd, initial_c);
    Eigen::VectorXd linpred = Xd * beta;
    estep(linpred, fit.w);
    double current = objective(linpred, beta, fit.w, penalty);
    fit.objective_trace.push_back(current);
    fit.converged = false;

    for (int it = 1; it <= config.max_iters; ++it) {
        NewtonResult m = maximize_q(Xd, fit.w, beta, penalty, config.newton_max_steps, config.newton_tol);
        if (!m.beta.allFinite()) throw ConvergenceError("M-step diverged at EM iteration " + std::to_string(it));
        beta = std::move(m.beta);
        linpred = Xd * beta;
        estep(linpred, fit.w);
        const double next = objective(linpred, beta, fit.w, penalty);
        fit.objective_trace.push_back(next);
        fit.iterations = it;
        if (next < current - 1e-10 * std::max(1.0, std::abs(current))) {
            fit.flagged_nonmonotone.push_back(static_cast<std::size_t>(it));
        }
        const bool done = std::abs(next - current) <= config.rel_tol * std::max(1.0, std::abs(current));
        current = next;
        if (done) {
            fit.converged = true;
            break;
        }
    }
    fit.beta = beta;
    fit.priorprob.resize(n);
    for (std::size_t i = 0; i < n; ++i) fit.priorprob[i] = logistic(linpred(static_cast<Eigen::Index>(i)));
    fit.finalize_localfdr();
    return fit;
}

}  // namespace

double observed_loglik(std::span<const double> z, const Eigen::MatrixXd& Xd, const Eigen::VectorXd& beta,
                       const NullModel& f0, const GridDensity& f1) {
    if (static_cast<std::size_t>(Xd.rows()) != z.size() || Xd.cols() != beta.size()) {
        throw DomainError("observed_loglik: dimension mismatch");
    }
    std::vector<double> lf0, lf1;
    log_densities(z, f0, f1, lf0, lf1);
    return observed_loglik(lf0, lf1, Xd * beta);
}

double q_objective(const Eigen::MatrixXd& Xd, std::span<const double> w, const Eigen::VectorXd& beta,
                   const Eigen::VectorXd& penalty) {
    const Eigen::VectorXd s = Xd * beta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) acc += w[static_cast<std::size_t>(i)] * s(i) - log1p_exp(s(i));
    return acc - penalty_term(beta, penalty);
}

Eigen::VectorXd q_gradient(const Eigen::MatrixXd& Xd, std::span<const double> w, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& penalty) {
    const Eigen::VectorXd s = Xd * beta;
    Eigen::VectorXd resid(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) resid(i) = w[static_cast<std::size_t>(i)] - logistic(s(i));
    return Xd.transpose() * resid - (penalty.array() * beta.array()).matrix();
}

NewtonResult maximize_q(const Eigen::MatrixXd& Xd, std::span<const double> w, Eigen::VectorXd beta,
                        const Eigen::VectorXd& penalty, int max_steps, double tol) {
    NewtonResult out;
    const Eigen::Index n = Xd.rows();
    double q = q_objective(Xd, w, beta, penalty);
    Eigen::VectorXd p(n), resid(n), weights(n);
    for (int step = 0; step < max_steps; ++step) {
        const Eigen::VectorXd s = Xd * beta;
        for (Eigen::Index i = 0; i < n; ++i) {
            p(i) = logistic(s(i));
            resid(i) = w[static_cast<std::size_t>(i)] - p(i);
            weights(i) = p(i) * (1.0 - p(i));
        }
        const Eigen::VectorXd grad = Xd.transpose() * resid - (penalty.array() * beta.array()).matrix();
        Eigen::MatrixXd hess = Xd.transpose() * weights.asDiagonal() * Xd;
        hess.diagonal() += penalty;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) throw ConvergenceError("M-step Hessian is singular");
        Eigen::VectorXd delta = ldlt.solve(grad);
        double next_q = q;
        Eigen::VectorXd candidate;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            candidate = beta + delta;
            next_q = q_objective(Xd, w, candidate, penalty);
            if (std::isfinite(next_q) && next_q >= q) {
                improved = true;
                break;
            }
            delta *= 0.5;
        }
        out.steps = step + 1;
        if (!improved) {
            // No ascent direction left at machine precision.
            out.converged = grad.lpNorm<Eigen::Infinity>() < 1e-6 * std::max(1.0, static_cast<double>(n));
            break;
        }
        beta = candidate;
        q = next_q;
        if (delta.lpNorm<Eigen::Infinity>() < tol) {
            out.converged = true;
            break;
        }
    }
    out.beta = std::move(beta);
    return out;
}

void check_identifiable(const Eigen::MatrixXd& Xd, const Eigen::VectorXd& penalty, std::span<const ColumnInfo> columns) {
    const Eigen::Index d = Xd.cols();
    Eigen::MatrixXd aug(Xd.rows() + d, d);
    aug.topRows(Xd.rows()) = Xd;
    aug.bottomRows(d) = penalty.cwiseSqrt().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aug);
    qr.setThreshold(1e-10);
    if (qr.rank() == d) return;
    std::string names;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < d; ++k) {
        const auto col = static_cast<std::size_t>(perm(k));
        if (!names.empty()) names += ", ";
        names += col < columns.size() ? columns[col].name : "column " + std::to_string(col);
    }
    throw DomainError("design is rank deficient; dependent columns: " + names);
}

RegressionFit em_fit_logdens(std::span<const double> log_f0, std::span<const double> log_f1, const Eigen::MatrixXd& Xd,
                             const EMConfig& config, double initial_c) {
    if (log_f0.size() != log_f1.size() || static_cast<std::size_t>(Xd.rows()) != log_f0.size()) {
        throw DomainError("em_fit: dimension mismatch");
    }
    auto estep = [&](const Eigen::VectorXd& s, std::vector<double>& w) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = logistic(s(static_cast<Eigen::Index>(i)) + log_f1[i] - log_f0[i]);
        }
    };
    auto objective = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& beta, const std::vector<double>&,
                         const Eigen::VectorXd& penalty) {
        return observed_loglik(log_f0, log_f1, s) - penalty_term(beta, penalty);
    };
    RegressionFit fit = run_em(Xd, config, initial_c, Method::EB, estep, objective);
    fit.loglik = observed_loglik(log_f0, log_f1, Xd * fit.beta);
    return fit;
}

RegressionFit em_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& f0, const GridDensity& f1,
                     const EMConfig& config, double initial_c) {
    f0.validate();
    std::vector<double> lf0, lf1;
    log_densities(z, f0, f1, lf0, lf1);
    return em_fit_logdens(lf0, lf1, Xd, config, initial_c);
}

double ebm_weight(double c, double f0_at_z, double marginal_at_z, double c_hat) {
    if ((1.0 - c_hat) * f0_at_z >= marginal_at_z) return 0.0;
    const double lfdr = std::clamp((1.0 - c) * f0_at_z / marginal_at_z, 0.0, 1.0);
    return 1.0 - lfdr;
}

RegressionFit ebm_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& f0,
                      const GridDensity& marginal, double c_hat, const EMConfig& config) {
    f0.validate();
    if (static_cast<std::size_t>(Xd.rows()) != z.size()) throw DomainError("ebm_fit: dimension mismatch");
    std::vector<double> f0v(z.size()), fv(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        f0v[i] = f0.pdf(z[i]);
        fv[i] = marginal(z[i]);
    }
    auto estep = [&](const Eigen::VectorXd& s, std::vector<double>& w) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = ebm_weight(logistic(s(static_cast<Eigen::Index>(i))), f0v[i], fv[i], c_hat);
        }
    };
    // No observed likelihood exists for this variant; track the M-step surrogate.
    auto objective = [&](const Eigen::VectorXd&, const Eigen::VectorXd& beta, const std::vector<double>& w,
                         const Eigen::VectorXd& penalty) { return q_objective(Xd, w, beta, penalty); };
    RegressionFit fit = run_em(Xd, config, c_hat, Method::EBm, estep, objective);
    fit.loglik = fit.objective_trace.back();
    return fit;
}

EBResult fit_eb(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null, const PRConfig& pr,
                const EMConfig& em) {
    EBResult out;
    out.pr = pr_fit(z, null, pr);
    out.f1 = f1_from_measure(out.pr.measure, null);
    out.fit = em_fit(z, Xd, null, out.f1, em, out.pr.c_hat);
    return out;
}

RegressionFit fit_ebm(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null, const EMConfig& em) {
    const MarginalFit marginal = fit_marginal_density(z);
    const double c_hat = estimate_signal_fraction_central(marginal.density, null);
    return ebm_fit(z, Xd, null, marginal.density, c_hat, em);
}

}  // namespace fdrreg

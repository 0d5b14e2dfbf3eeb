#include "fdrreg/gibbs.hpp"

#include "fdrreg/diagnostics.hpp"
#include "fdrreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>

namespace fdrreg {
namespace {

double draw_inverse_gamma(double shape, double rate, Rng& rng) {
    std::gamma_distribution<double> g(shape, 1.0 / rate);
    return 1.0 / g(rng);
}

Eigen::Index constant_column(const Eigen::MatrixXd& Xd) {
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
        if (Xd.rows() > 0 && (Xd.col(j).array() == Xd(0, j)).all() && Xd(0, j) != 0.0) return j;
    }
    return -1;
}

}  // namespace

void GibbsConfig::validate() const {
    if (iterations < 1) throw DomainError("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations) throw DomainError("burn-in must be in [0, iterations)");
    if (thin < 1) throw DomainError("thinning must be at least 1");
    if (!(beta_prior_variance > 0.0) || !(v_mu > 0.0) || !(a > 0.0) || !(b > 0.0) || !(alpha > 0.0)) {
        throw DomainError("Gibbs hyperparameters must be positive");
    }
    if (components < 0) throw DomainError("components must be non-negative");
    if (max_components < 1) throw DomainError("max_components must be at least 1");
}

GibbsSampler::GibbsSampler(const Eigen::MatrixXd& Xd, const NullModel& null, const GibbsConfig& config)
    : Xd_(Xd), null_(null), config_(config) {
    null_.validate();
    config_.validate();
    const Eigen::Index d = Xd_.cols();
    if (d == 0) throw DomainError("design matrix has no columns");
    b0_ = config_.b0.size() == 0 ? Eigen::VectorXd::Zero(d) : config_.b0;
    if (b0_.size() != d) throw DomainError("b0 length does not match the design");
    Eigen::MatrixXd B0 = config_.B0.size() == 0 ? Eigen::MatrixXd(Eigen::MatrixXd::Identity(d, d) * config_.beta_prior_variance)
                                                : config_.B0;
    if (B0.rows() != d || B0.cols() != d) throw DomainError("B0 shape does not match the design");
    Eigen::LLT<Eigen::MatrixXd> llt(B0);
    if (llt.info() != Eigen::Success) throw DomainError("B0 must be positive definite");
    B0_inv_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    B0_inv_b0_ = B0_inv_ * b0_;
}

GibbsState GibbsSampler::initial_state(std::span<const double> z, const GaussianMixturePrior& prior, double c0,
                                       Rng& rng) const {
    prior.validate();
    const std::size_t n = z.size();
    if (static_cast<Eigen::Index>(n) != Xd_.rows()) throw DomainError("z and design differ in length");
    GibbsState s;
    s.beta = Eigen::VectorXd::Zero(Xd_.cols());
    const Eigen::Index ic = constant_column(Xd_);
    if (ic >= 0) s.beta(ic) = logit(std::clamp(c0, 1e-3, 1.0 - 1e-3)) / Xd_(0, ic);
    s.mixture = prior;
    s.h.assign(n, 0);
    s.label.assign(n, -1);
    s.theta.assign(n, 0.0);
    s.omega.assign(n, 0.25);
    s.w.assign(n, 0.0);
    GibbsConfig frozen = config_;
    frozen.update_mixture = false;
    GibbsSampler first(Xd_, null_, frozen);
    // A sweep with the mixture held fixed fills h, labels and theta consistently;
    // beta is then restored to the starting value.
    const Eigen::VectorXd beta0 = s.beta;
    first.sweep(z, s, rng);
    s.beta = beta0;
    return s;
}

void GibbsSampler::sweep(std::span<const double> z, GibbsState& s, Rng& rng) const {
    const std::size_t n = z.size();
    const std::size_t K = s.mixture.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);

    std::vector<double> log_eta(K), pred_var(K), log_norm(K);
    for (std::size_t k = 0; k < K; ++k) {
        log_eta[k] = std::log(s.mixture.weight[k]);
        pred_var[k] = s.mixture.variance[k] + null_.sigma2;
        log_norm[k] = -kLogSqrt2Pi - 0.5 * std::log(pred_var[k]);
    }
    const Eigen::VectorXd lin = Xd_ * s.beta;
    std::vector<double> logp(K);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = z[i] - null_.mu;
        for (std::size_t k = 0; k < K; ++k) {
            const double r = d - s.mixture.mean[k];
            logp[k] = log_eta[k] + log_norm[k] - 0.5 * r * r / pred_var[k];
        }
        const double log_f1 = log_sum_exp(logp);
        const double log_f0 = normal_logpdf(d, 0.0, null_.sigma2);
        s.w[i] = logistic(lin(i) + log_f1 - log_f0);
        s.h[i] = unif(rng) < s.w[i] ? 1 : 0;
        if (!s.h[i]) {
            s.label[i] = -1;
            s.theta[i] = 0.0;
            continue;
        }
        double u = unif(rng);
        std::size_t k = 0;
        for (; k + 1 < K; ++k) {
            u -= std::exp(logp[k] - log_f1);
            if (u < 0.0) break;
        }
        s.label[i] = static_cast<int>(k);
        const double prec = 1.0 / s.mixture.variance[k] + 1.0 / null_.sigma2;
        const double mean = (s.mixture.mean[k] / s.mixture.variance[k] + d / null_.sigma2) / prec;
        s.theta[i] = mean + norm(rng) / std::sqrt(prec);
    }

    s.beta = sample_beta(s.h, s.beta, s.omega, rng);
    if (config_.update_mixture) sample_mixture(s, rng);
}

Eigen::VectorXd GibbsSampler::sample_beta(std::span<const int> h, const Eigen::VectorXd& beta, std::vector<double>& omega,
                                          Rng& rng) const {
    const Eigen::Index n = Xd_.rows();
    const Eigen::Index d = Xd_.cols();
    if (static_cast<Eigen::Index>(h.size()) != n) throw DomainError("h and design differ in length");
    omega.resize(static_cast<std::size_t>(n));
    const Eigen::VectorXd lin = Xd_ * beta;
    Eigen::VectorXd kappa(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        omega[static_cast<std::size_t>(i)] = pg_.draw(lin(i), rng);
        kappa(i) = h[static_cast<std::size_t>(i)] - 0.5;
    }
    const Eigen::Map<const Eigen::VectorXd> om(omega.data(), n);
    Eigen::MatrixXd prec = B0_inv_;
    prec.selfadjointView<Eigen::Lower>().rankUpdate((Xd_.array().colwise() * om.array().sqrt()).matrix().transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success) {
        prec.diagonal().array() += 1e-8;
        llt.compute(prec);
        if (llt.info() != Eigen::Success) throw ConvergenceError("beta posterior precision is not positive definite");
    }
    const Eigen::VectorXd m = llt.solve(Xd_.transpose() * kappa + B0_inv_b0_);
    std::normal_distribution<double> norm(0.0, 1.0);
    Eigen::VectorXd eps(d);
    for (Eigen::Index j = 0; j < d; ++j) eps(j) = norm(rng);
    return m + llt.matrixU().solve(eps);
}

void GibbsSampler::sample_mixture(GibbsState& s, Rng& rng) const {
    const std::size_t K = s.mixture.size();
    std::vector<double> count(K, 0.0), sum(K, 0.0);
    for (std::size_t i = 0; i < s.h.size(); ++i) {
        if (!s.h[i]) continue;
        const auto k = static_cast<std::size_t>(s.label[i]);
        count[k] += 1.0;
        sum[k] += s.theta[i];
    }
    std::normal_distribution<double> norm(0.0, 1.0);
    for (std::size_t k = 0; k < K; ++k) {
        // Empty components reduce to draws from the prior.
        const double tau2 = s.mixture.variance[k];
        const double prec = count[k] / tau2 + 1.0 / config_.v_mu;
        const double mk = sum[k] / tau2 / prec + norm(rng) / std::sqrt(prec);
        s.mixture.mean[k] = mk;
        double ss = 0.0;
        for (std::size_t i = 0; i < s.h.size(); ++i) {
            if (s.h[i] && static_cast<std::size_t>(s.label[i]) == k) ss += (s.theta[i] - mk) * (s.theta[i] - mk);
        }
        s.mixture.variance[k] =
            std::max(draw_inverse_gamma(0.5 * (config_.a + count[k]), 0.5 * (config_.b + ss), rng), 1e-12);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        std::gamma_distribution<double> g(config_.alpha + count[k], 1.0);
        s.mixture.weight[k] = std::max(g(rng), 1e-300);
        total += s.mixture.weight[k];
    }
    for (double& w : s.mixture.weight) w /= total;
}

std::vector<double> PosteriorSamples::localfdr() const {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = 1.0 - w[i];
    return out;
}

PosteriorSamples gibbs_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null,
                           const GibbsConfig& config, const std::optional<GaussianMixturePrior>& initial) {
    config.validate();
    null.validate();
    const std::size_t n = z.size();
    if (static_cast<Eigen::Index>(n) != Xd.rows()) throw DomainError("z and design differ in length");
    for (double v : z) {
        if (!std::isfinite(v)) throw DomainError("test statistics must be finite");
    }

    GaussianMixturePrior prior;
    double c0 = 0.1;
    if (initial) {
        prior = *initial;
    } else {
        int K = config.components;
        if (K == 0) K = select_components_by_aic(z, null, config.max_components).best;
        try {
            DeconvolutionConfig dc;
            dc.include_null = true;
            const DeconvolutionFit fit = fit_deconvolution(z, null, K, dc);
            prior = fit.signal;
            c0 = 1.0 - fit.null_weight;
        } catch (const ConvergenceError&) {
            prior = fit_deconvolution(z, null, K).signal;
        } catch (const DegenerateDataError&) {
            prior = fit_deconvolution(z, null, K).signal;
        }
    }
    c0 = std::clamp(c0, 0.01, 0.99);

    Rng rng(derive_seed(config.seed, 0));
    const GibbsSampler sampler(Xd, null, config);
    GibbsState state = sampler.initial_state(z, prior, c0, rng);

    const int kept = (config.iterations - config.burn_in + config.thin - 1) / config.thin;
    PosteriorSamples out;
    out.components = static_cast<int>(prior.size());
    out.beta_draws.resize(kept, Xd.cols());
    out.w.assign(n, 0.0);
    out.inclusion_frequency.assign(n, 0.0);
    out.mixture_draws.reserve(static_cast<std::size_t>(kept));
    int row = 0;
    for (int it = 0; it < config.iterations; ++it) {
        sampler.sweep(z, state, rng);
        if (it < config.burn_in || (it - config.burn_in) % config.thin != 0) continue;
        out.beta_draws.row(row++) = state.beta.transpose();
        for (std::size_t i = 0; i < n; ++i) {
            out.w[i] += state.w[i];
            out.inclusion_frequency[i] += state.h[i];
        }
        out.mixture_draws.push_back(state.mixture);
    }
    out.kept = row;
    for (std::size_t i = 0; i < n; ++i) {
        out.w[i] /= row;
        out.inclusion_frequency[i] /= row;
    }
    out.beta_mean = out.beta_draws.colwise().mean().transpose();
    out.beta_ess.resize(Xd.cols());
    for (Eigen::Index j = 0; j < Xd.cols(); ++j) {
        const Eigen::VectorXd col = out.beta_draws.col(j);
        out.beta_ess(j) = effective_sample_size(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    }
    return out;
}

double jaccard_index(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.empty() && b.empty()) return 1.0;
    std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    std::vector<std::size_t> both;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(both));
    const double uni = static_cast<double>(sa.size() + sb.size() - both.size());
    return static_cast<double>(both.size()) / uni;
}

EbFbComparison compare_eb_fb(std::span<const double> w_eb, std::span<const double> w_fb, double q) {
    if (w_eb.size() != w_fb.size()) throw DomainError("EB and FB fits differ in length");
    if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0, 1)");
    EbFbComparison out;
    std::vector<double> lf_eb(w_eb.size()), lf_fb(w_fb.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w_eb.size(); ++i) {
        const double diff = std::abs(w_eb[i] - w_fb[i]);
        total += diff;
        out.max_abs_diff = std::max(out.max_abs_diff, diff);
        lf_eb[i] = 1.0 - w_eb[i];
        lf_fb[i] = 1.0 - w_fb[i];
    }
    out.mean_abs_diff = w_eb.empty() ? 0.0 : total / static_cast<double>(w_eb.size());
    const auto d_eb = bayes_fdr_select(lf_eb, q);
    const auto d_fb = bayes_fdr_select(lf_fb, q);
    out.eb_discoveries = d_eb.size();
    out.fb_discoveries = d_fb.size();
    out.jaccard = jaccard_index(d_eb, d_fb);
    return out;
}

EbFbComparison compare_eb_fb(const RegressionFit& eb, const PosteriorSamples& fb, double q) {
    return compare_eb_fb(eb.w, fb.w, q);
}

}  // namespace fdrreg

#pragma once

// FDR regression by EM with a fixed plug-in alternative density (EB) and the
// marginalized variant that substitutes a global marginal density (EBm).

#include "fdrreg/basis_splines.hpp"
#include "fdrreg/model_core.hpp"
#include "fdrreg/predictive_recursion.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace fdrreg {

struct EMConfig {
    int max_iters = 200;
    double rel_tol = 1e-6;
    double ridge = 1.0;            // Gaussian prior precision on non-constant columns
    double intercept_ridge = 0.0;  // precision on constant columns
    int newton_max_steps = 50;
    double newton_tol = 1e-10;

    void validate() const;
};

// Per-column prior precision: intercept_ridge for constant columns, ridge otherwise.
Eigen::VectorXd penalty_vector(const Eigen::MatrixXd& Xd, const EMConfig& config);

// Sum_i log[c_i f1(z_i) + (1 - c_i) f0(z_i)], c_i = logistic(x_i' beta), in log space.
double observed_loglik(std::span<const double> z, const Eigen::MatrixXd& Xd, const Eigen::VectorXd& beta,
                       const NullModel& f0, const GridDensity& f1);

double observed_loglik(std::span<const double> log_f0, std::span<const double> log_f1, const Eigen::VectorXd& linpred);

// M-step objective sum_i {w_i s_i - log(1 + e^{s_i})} - beta' P beta / 2 and its gradient.
double q_objective(const Eigen::MatrixXd& Xd, std::span<const double> w, const Eigen::VectorXd& beta,
                   const Eigen::VectorXd& penalty);
Eigen::VectorXd q_gradient(const Eigen::MatrixXd& Xd, std::span<const double> w, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& penalty);

struct NewtonResult {
    Eigen::VectorXd beta;
    int steps = 0;
    bool converged = false;
};

// Maximizes q_objective by Newton-Raphson with step halving.
NewtonResult maximize_q(const Eigen::MatrixXd& Xd, std::span<const double> w, Eigen::VectorXd beta,
                        const Eigen::VectorXd& penalty, int max_steps, double tol);

// Throws DomainError naming the dependent columns when [Xd; sqrt(P)] is rank deficient.
void check_identifiable(const Eigen::MatrixXd& Xd, const Eigen::VectorXd& penalty,
                        std::span<const ColumnInfo> columns = {});

// EB: alternates posterior weights with f1 held fixed and a penalized Newton M-step.
// `initial_c` seeds the intercept (other coefficients start at 0).
RegressionFit em_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& f0, const GridDensity& f1,
                     const EMConfig& config, double initial_c);

// Same loop on precomputed log densities.
RegressionFit em_fit_logdens(std::span<const double> log_f0, std::span<const double> log_f1, const Eigen::MatrixXd& Xd,
                             const EMConfig& config, double initial_c);

// EBm: E-step uses the truncated marginalized ratio with a fixed marginal
// density and signal fraction.
RegressionFit ebm_fit(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& f0,
                      const GridDensity& marginal, double c_hat, const EMConfig& config);

// Marginalized posterior weight: 0 inside the zeroed central region, else the
// projected ratio.
double ebm_weight(double c, double f0_at_z, double marginal_at_z, double c_hat);

// End-to-end EB: predictive recursion for f1, then em_fit.
struct EBResult {
    RegressionFit fit;
    PRResult pr;
    GridDensity f1;
};
EBResult fit_eb(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null, const PRConfig& pr,
                const EMConfig& em);

// End-to-end EBm: Lindsey marginal and c_hat, then ebm_fit.
RegressionFit fit_ebm(std::span<const double> z, const Eigen::MatrixXd& Xd, const NullModel& null, const EMConfig& em);

}  // namespace fdrreg

#pragma once

// Two-groups / FDR-regression data model, posterior probabilities, Bayesian FDR
// thresholding and the Benjamini-Hochberg baseline.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fdrreg {

// Test statistics plus raw (un-expanded) covariates, one row per test.
struct TestTable {
    std::vector<double> z;
    Eigen::MatrixXd X;  // n x p, p may be 0
    std::vector<std::string> names;

    std::size_t size() const { return z.size(); }
    std::size_t num_covariates() const { return static_cast<std::size_t>(X.cols()); }

    // Throws DomainError when the invariants do not hold.
    void validate() const;
};

// Gaussian null N(mu, sigma2).
struct NullModel {
    double mu = 0.0;
    double sigma2 = 1.0;

    double sigma() const;
    double pdf(double z) const;
    double logpdf(double z) const;
    void validate() const;
};

enum class Method { BH, TwoGroups, EBm, EB, FB };

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

// Density tabulated on a strictly increasing grid, linearly interpolated and
// zero outside the grid.
class GridDensity {
public:
    GridDensity() = default;
    GridDensity(std::vector<double> grid, std::vector<double> values);

    double operator()(double z) const;
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    double integral() const;
    bool empty() const { return grid_.empty(); }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

struct DensityPair {
    NullModel f0;
    GridDensity f1;
};

// Common output of every fitter.
struct RegressionFit {
    Method method = Method::EB;
    Eigen::VectorXd beta;
    std::vector<double> w;          // P(signal | z_i, x_i)
    std::vector<double> localfdr;   // 1 - w_i
    std::vector<double> priorprob;  // c(x_i)
    std::vector<double> objective_trace;  // per EM iteration (penalized log-likelihood for EB)
    double loglik = 0.0;            // final observed-data log-likelihood (where defined)
    double c_hat = 0.0;             // no-covariate signal fraction used for initialization / 2G
    int iterations = 0;
    bool converged = true;
    std::vector<std::size_t> flagged_nonmonotone;  // iterations where the objective decreased (EBm)

    // Fills localfdr from w.
    void finalize_localfdr();
};

// c*f1 / (c*f1 + (1-c)*f0); 0 when c == 0 and 1 when c == 1.
double posterior_probability(double c, double f1_at_z, double f0_at_z);

// Largest prefix of tests sorted by ascending local fdr whose running mean is
// at most q. Ties are broken by original index. Returned indices are 0-based
// and sorted ascending.
std::vector<std::size_t> bayes_fdr_select(std::span<const double> localfdr, double q);

// Step-up procedure on raw p-values.
std::vector<std::size_t> benjamini_hochberg_pvalues(std::span<const double> pvalues, double q);

// Two-sided p-values under the null, then the step-up rule.
std::vector<std::size_t> benjamini_hochberg(std::span<const double> z, const NullModel& null, double q);

double two_sided_pvalue(double z, const NullModel& null);

// No-covariate two-groups model using a Lindsey-method marginal density and
// the central-ratio estimate of c.
RegressionFit two_groups_fit(std::span<const double> z, const NullModel& null);

}  // namespace fdrreg

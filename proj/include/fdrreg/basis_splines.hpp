#pragma once

// B-spline expansion of raw covariates into an additive-model design matrix
// s(x) = b0 + sum_j s_j(x_j). Each covariate block drops its first basis
// function so every partial function vanishes at the covariate's left end.

#include "fdrreg/model_core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fdrreg {

struct BasisSpec {
    int degree = 3;
    int interior_knots = 5;                           // equally spaced, used when explicit knots are absent
    std::vector<std::vector<double>> explicit_knots;  // per covariate interior knots (optional)
    bool intercept = true;

    void validate() const;
    // Columns per covariate after identification.
    int block_size(std::size_t covariate) const;
    // Spec whose identified block size equals df for every covariate.
    static BasisSpec with_df(int df, int degree = 3);
};

// Clamped B-spline basis on [lo, hi] with the given interior knots.
class SplineBasis {
public:
    SplineBasis(double lo, double hi, std::vector<double> interior, int degree);

    int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    int degree() const { return degree_; }
    double lower() const { return lo_; }
    double upper() const { return hi_; }
    const std::vector<double>& knots() const { return knots_; }
    std::vector<double> interior_knots() const;

    // All basis values at x (out-of-span x is clamped to the boundary).
    std::vector<double> evaluate(double x) const;

private:
    double lo_;
    double hi_;
    int degree_;
    std::vector<double> knots_;  // full clamped knot vector
};

struct ColumnInfo {
    std::string name;
    int covariate = -1;  // -1 for the intercept
    int basis_index = -1;
};

struct DesignMatrix {
    Eigen::MatrixXd matrix;
    std::vector<ColumnInfo> columns;
    std::vector<SplineBasis> bases;
    bool intercept = true;

    Eigen::Index cols() const { return matrix.cols(); }
    // Expands new raw covariates with the same bases.
    Eigen::MatrixXd expand(const Eigen::MatrixXd& X) const;
};

// Boundaries come from each covariate's observed range.
DesignMatrix design_matrix(const Eigen::MatrixXd& X, const BasisSpec& spec,
                           std::span<const std::string> names = {});

// Rebuilds a design from stored bases (used when resuming a saved fit).
DesignMatrix design_matrix_from_bases(const Eigen::MatrixXd& X, std::vector<SplineBasis> bases, bool intercept,
                                      std::span<const std::string> names = {});

// Returns the observed-data log-likelihood of a fit on the given design.
using DesignFitter = std::function<double(const DesignMatrix&)>;

struct AicCandidate {
    BasisSpec spec;
    double aic = 0.0;
    int params = 0;
    bool failed = false;
    std::string error;
};

struct AicSelection {
    BasisSpec best;
    std::vector<AicCandidate> candidates;
};

// AIC = -2 loglik + 2 d, ties keep the earlier candidate; failing candidates
// are skipped and recorded.
AicSelection aic_select_df(const Eigen::MatrixXd& X, std::span<const BasisSpec> candidates, const DesignFitter& fit);

}  // namespace fdrreg

#include "fdrreg/basis_splines.hpp"

#include "fdrreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace fdrreg {

void BasisSpec::validate() const {
    if (degree < 1) throw DomainError("spline degree must be at least 1");
    if (interior_knots < 0) throw DomainError("interior knot count must be non-negative");
    for (const auto& k : explicit_knots) {
        for (std::size_t i = 1; i < k.size(); ++i) {
            if (!(k[i] > k[i - 1])) throw DomainError("knot vector must be strictly increasing");
        }
    }
}

int BasisSpec::block_size(std::size_t covariate) const {
    const int k = covariate < explicit_knots.size() ? static_cast<int>(explicit_knots[covariate].size()) : interior_knots;
    return k + degree;
}

BasisSpec BasisSpec::with_df(int df, int degree) {
    if (df < degree) throw DomainError("degrees of freedom must be at least the spline degree");
    BasisSpec spec;
    spec.degree = degree;
    spec.interior_knots = df - degree;
    return spec;
}

SplineBasis::SplineBasis(double lo, double hi, std::vector<double> interior, int degree)
    : lo_(lo), hi_(hi), degree_(degree) {
    if (degree < 1) throw DomainError("spline degree must be at least 1");
    if (!(hi > lo)) throw DegenerateDataError("covariate has zero range");
    double prev = lo;
    for (double k : interior) {
        if (!(k > prev)) throw DomainError("knot vector must be strictly increasing");
        prev = k;
    }
    if (!(hi > prev)) throw DomainError("knot vector must be strictly increasing");
    knots_.assign(static_cast<std::size_t>(degree + 1), lo);
    knots_.insert(knots_.end(), interior.begin(), interior.end());
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), hi);
}

std::vector<double> SplineBasis::interior_knots() const {
    return {knots_.begin() + degree_ + 1, knots_.end() - degree_ - 1};
}

std::vector<double> SplineBasis::evaluate(double x) const {
    x = std::clamp(x, lo_, hi_);
    const int p = degree_;
    const int m = static_cast<int>(knots_.size());
    const int nbasis = m - p - 1;
    // Knot span t[span] <= x < t[span + 1], with the right boundary folded into the last span.
    int span = nbasis - 1;
    if (x < hi_) {
        span = static_cast<int>(std::upper_bound(knots_.begin() + p, knots_.begin() + nbasis, x) - knots_.begin()) - 1;
    }
    // Cox-de Boor triangle for the p + 1 non-zero functions on this span.
    std::vector<double> local(static_cast<std::size_t>(p + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    local[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double tmp = denom != 0.0 ? local[r] / denom : 0.0;
            local[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        local[j] = saved;
    }
    std::vector<double> out(static_cast<std::size_t>(nbasis), 0.0);
    for (int r = 0; r <= p; ++r) out[static_cast<std::size_t>(span - p + r)] = local[r];
    return out;
}

Eigen::MatrixXd DesignMatrix::expand(const Eigen::MatrixXd& X) const {
    if (static_cast<std::size_t>(X.cols()) != bases.size()) throw DomainError("covariate count does not match the design");
    Eigen::Index cols = intercept ? 1 : 0;
    for (const auto& b : bases) cols += b.size() - 1;
    Eigen::MatrixXd out(X.rows(), cols);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::Index c = 0;
        if (intercept) out(i, c++) = 1.0;
        for (std::size_t j = 0; j < bases.size(); ++j) {
            const std::vector<double> v = bases[j].evaluate(X(i, static_cast<Eigen::Index>(j)));
            for (std::size_t k = 1; k < v.size(); ++k) out(i, c++) = v[k];
        }
    }
    return out;
}

DesignMatrix design_matrix_from_bases(const Eigen::MatrixXd& X, std::vector<SplineBasis> bases, bool intercept,
                                      std::span<const std::string> names) {
    DesignMatrix d;
    d.bases = std::move(bases);
    d.intercept = intercept;
    if (intercept) d.columns.push_back({"(intercept)", -1, -1});
    for (std::size_t j = 0; j < d.bases.size(); ++j) {
        const std::string base = j < names.size() ? names[j] : "x" + std::to_string(j + 1);
        for (int k = 1; k < d.bases[j].size(); ++k) {
            d.columns.push_back({base + ".bs" + std::to_string(k), static_cast<int>(j), k});
        }
    }
    d.matrix = d.expand(X);
    if (d.matrix.cols() == 0) throw DomainError("design has no columns");
    return d;
}

DesignMatrix design_matrix(const Eigen::MatrixXd& X, const BasisSpec& spec, std::span<const std::string> names) {
    spec.validate();
    if (X.rows() == 0) throw DomainError("design matrix needs at least one row");
    std::vector<SplineBasis> bases;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double lo = X.col(j).minCoeff();
        const double hi = X.col(j).maxCoeff();
        std::vector<double> interior;
        const auto ju = static_cast<std::size_t>(j);
        if (ju < spec.explicit_knots.size()) {
            for (double k : spec.explicit_knots[ju]) {
                if (k > lo && k < hi) interior.push_back(k);
            }
        } else {
            for (int k = 1; k <= spec.interior_knots; ++k) {
                interior.push_back(lo + (hi - lo) * k / (spec.interior_knots + 1.0));
            }
        }
        bases.emplace_back(lo, hi, std::move(interior), spec.degree);
    }
    return design_matrix_from_bases(X, std::move(bases), spec.intercept, names);
}

AicSelection aic_select_df(const Eigen::MatrixXd& X, std::span<const BasisSpec> candidates, const DesignFitter& fit) {
    if (candidates.empty()) throw DomainError("no candidate bases");
    AicSelection out;
    if (candidates.size() == 1) {
        out.best = candidates.front();
        out.candidates.push_back({candidates.front(), 0.0, 0, false, {}});
        return out;
    }
    int best = -1;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        AicCandidate cand{candidates[k], 0.0, 0, false, {}};
        try {
            const DesignMatrix design = design_matrix(X, candidates[k]);
            const double loglik = fit(design);
            if (!std::isfinite(loglik)) throw ConvergenceError("non-finite log-likelihood");
            cand.params = static_cast<int>(design.cols());
            cand.aic = -2.0 * loglik + 2.0 * cand.params;
            if (best < 0 || cand.aic < out.candidates[static_cast<std::size_t>(best)].aic) best = static_cast<int>(k);
        } catch (const std::exception& e) {
            cand.failed = true;
            cand.error = e.what();
            std::cerr << "warning: basis candidate " << k << " skipped: " << e.what() << '\n';
        }
        out.candidates.push_back(std::move(cand));
    }
    if (best < 0) throw ConvergenceError("every basis candidate failed to fit");
    out.best = out.candidates[static_cast<std::size_t>(best)].spec;
    return out;
}

}  // namespace fdrreg

#pragma once

// Logistic propensity-score model primitives: partition function, likelihood,
// score, Fisher information and fitted propensities. No intercept.

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "goal/errors.hpp"

namespace goal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Coefficients of the propensity model, log-odds scale.
using CoefficientVector = Vector;

/// Observed data: covariates X (n x p), binary treatment A, outcome Y.
struct Dataset {
    Matrix X;
    Vector A;
    Vector Y;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
};

/// Throws InvalidArgument / DimensionMismatch if the dataset invariants fail.
inline void validate(const Dataset& d) {
    if (d.X.rows() < 1 || d.X.cols() < 1) throw InvalidArgument("dataset needs n >= 1 and p >= 1");
    if (d.A.size() != d.X.rows() || d.Y.size() != d.X.rows())
        throw DimensionMismatch("X, A and Y must have the same number of rows");
    for (Index i = 0; i < d.A.size(); ++i) {
        if (d.A[i] != 0.0 && d.A[i] != 1.0)
            throw InvalidArgument("treatment entry " + std::to_string(i + 1) + " is not 0 or 1");
    }
    if (!d.X.allFinite() || !d.Y.allFinite()) throw InvalidArgument("dataset contains non-finite values");
}

inline Dataset make_dataset(Matrix X, Vector A, Vector Y) {
    Dataset d{std::move(X), std::move(A), std::move(Y)};
    validate(d);
    return d;
}

// phi(t) = log(1 + e^t) and its first two derivatives.
inline double phi(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

inline double phi1(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double phi2(double t) {
    const double s = phi1(t);
    return s * (1.0 - s);
}

namespace detail {

inline void check_alpha(const Dataset& d, const CoefficientVector& alpha) {
    require_dims(alpha.size() == d.p(), "coefficient vector length differs from number of covariates");
    require_dims(d.A.size() == d.n(), "treatment vector length differs from number of rows");
}

} // namespace detail

inline Vector linear_predictor(const Dataset& d, const CoefficientVector& alpha) {
    detail::check_alpha(d, alpha);
    return d.X * alpha;
}

/// sum_i [ -a_i x_i'alpha + phi(x_i'alpha) ]
inline double neg_log_likelihood(const Dataset& d, const CoefficientVector& alpha) {
    const Vector eta = linear_predictor(d, alpha);
    double total = 0.0;
    for (Index i = 0; i < eta.size(); ++i) total += phi(eta[i]) - d.A[i] * eta[i];
    return total;
}

/// Gradient of neg_log_likelihood: -sum_i (a_i - phi'(x_i'alpha)) x_i.
inline Vector score(const Dataset& d, const CoefficientVector& alpha) {
    const Vector eta = linear_predictor(d, alpha);
    Vector resid(eta.size());
    for (Index i = 0; i < eta.size(); ++i) resid[i] = phi1(eta[i]) - d.A[i];
    return d.X.transpose() * resid;
}

/// Per-observation Fisher information (1/n) sum_i phi''(x_i'alpha) x_i x_i',
/// optionally with the block F11 for a caller-chosen active index set.
struct FisherInfo {
    Matrix F;
    Matrix F11;
};

inline Matrix active_block(const Matrix& F, std::span<const Index> active) {
    const auto k = static_cast<Index>(active.size());
    Matrix out(k, k);
    for (Index r = 0; r < k; ++r) {
        for (Index c = 0; c < k; ++c) {
            const Index i = active[static_cast<std::size_t>(r)];
            const Index j = active[static_cast<std::size_t>(c)];
            detail::require_dims(i >= 0 && i < F.rows() && j >= 0 && j < F.rows(),
                                 "active index out of range");
            out(r, c) = F(i, j);
        }
    }
    return out;
}

inline FisherInfo fisher_information(const Dataset& d, const CoefficientVector& alpha,
                                     std::span<const Index> active = {}) {
    const Vector eta = linear_predictor(d, alpha);
    Vector root_w(eta.size());
    for (Index i = 0; i < eta.size(); ++i) root_w[i] = std::sqrt(phi2(eta[i]));
    const Matrix Xw = d.X.array().colwise() * root_w.array();

    FisherInfo info;
    Matrix lower = Matrix::Zero(d.p(), d.p());
    lower.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose(), 1.0 / static_cast<double>(d.n()));
    info.F = lower.selfadjointView<Eigen::Lower>();
    if (!active.empty()) info.F11 = active_block(info.F, active);
    return info;
}

/// expit(x_i'alpha) for every row.
inline Vector propensity(const Dataset& d, const CoefficientVector& alpha) {
    Vector eta = linear_predictor(d, alpha);
    for (Index i = 0; i < eta.size(); ++i) eta[i] = phi1(eta[i]);
    return eta;
}

} // namespace goal

#pragma once

// Outcome-adaptive L1 weights and tuning-parameter schedules.

#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "goal/model.hpp"

namespace goal {

/// Least-squares regression of Y on [A | X].
struct OlsFit {
    double beta_A = 0.0;
    Vector beta;
    double residual_norm = 0.0;
    Index rank = 0;
};

/// Minimum-norm least squares via complete orthogonal decomposition, so
/// rank-deficient designs (including p + 1 > n) are handled.
inline OlsFit ols_fit(const Dataset& d) {
    if (d.n() == 0) throw DegenerateDesign("outcome regression needs at least one row");
    detail::require_dims(d.A.size() == d.n() && d.Y.size() == d.n(), "X, A and Y must have the same number of rows");

    Matrix design(d.n(), d.p() + 1);
    design.col(0) = d.A;
    design.rightCols(d.p()) = d.X;
    if ((design.array() == 0.0).all()) throw DegenerateDesign("every column of the outcome design is zero");

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    const Vector coef = cod.solve(d.Y);

    OlsFit out;
    out.beta_A = coef[0];
    out.beta = coef.tail(d.p());
    out.residual_norm = (d.Y - design * coef).norm();
    out.rank = cod.rank();
    return out;
}

/// w_j = |beta_j|^-gamma; an exactly-zero coefficient maps to +inf.
inline Vector compute_weights(const OlsFit& fit, double gamma) {
    if (!(gamma > 1.0)) throw InvalidGamma(gamma);
    Vector w(fit.beta.size());
    for (Index j = 0; j < w.size(); ++j) {
        const double b = std::abs(fit.beta[j]);
        w[j] = b == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(b, -gamma);
    }
    return w;
}

struct LambdaPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    friend bool operator==(const LambdaPair&, const LambdaPair&) = default;
};

/// Exponent c for lambda1 = n^c: midpoint of the admissible open interval
/// (max(0, 1 - gamma/2), 1/2), which keeps lambda1/sqrt(n) -> 0 and
/// lambda1 * n^(gamma/2 - 1) -> infinity.
inline double lambda1_exponent(double gamma) {
    if (!(gamma > 1.0)) throw InvalidGamma(gamma);
    const double lower = std::max(0.0, 1.0 - gamma / 2.0);
    return (0.5 + lower) / 2.0;
}

/// Rate-admissible (lambda1, lambda2) for sample size n; lambda2 = n^(1/4).
inline LambdaPair lambda_schedule(Index n, double gamma) {
    if (n < 1) throw InvalidArgument("lambda_schedule needs n >= 1");
    const double c = lambda1_exponent(gamma);
    const double nn = static_cast<double>(n);
    return {std::pow(nn, c), std::pow(nn, 0.25)};
}

inline constexpr std::array<double, 8> kLambda1Exponents = {-10.0, -5.0, -1.0, -0.75, -0.5, -0.25, 0.25, 0.49};

/// lambda1 = n * n^e over kLambda1Exponents, crossed with
/// lambda2 in {0, n^(1/4), 2 n^(1/4)}. Ordered by lambda2 level, then
/// increasing lambda1.
inline std::vector<LambdaPair> lambda_grid(Index n) {
    if (n < 1) throw InvalidArgument("lambda_grid needs n >= 1");
    const double nn = static_cast<double>(n);
    const double base2 = std::pow(nn, 0.25);
    const std::array<double, 3> lambda2_levels = {0.0, base2, 2.0 * base2};

    std::vector<LambdaPair> grid;
    grid.reserve(kLambda1Exponents.size() * lambda2_levels.size());
    for (double l2 : lambda2_levels) {
        for (double e : kLambda1Exponents) grid.push_back({nn * std::pow(nn, e), l2});
    }
    return grid;
}

} // namespace goal

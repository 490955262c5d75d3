#pragma once

// GOAL / OAL / lasso propensity-score estimation with wAMD tuning and a
// normalized (Hajek) IPTW estimate of the average treatment effect.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "goal/solver.hpp"
#include "goal/weights.hpp"

namespace goal {

enum class MethodKind { GOAL, OAL, LASSO };

inline std::string_view to_string(MethodKind k) {
    switch (k) {
        case MethodKind::GOAL: return "GOAL";
        case MethodKind::OAL: return "OAL";
        case MethodKind::LASSO: return "LASSO";
    }
    return "?";
}

inline std::optional<MethodKind> parse_method(std::string_view s) {
    std::string up(s);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "GOAL") return MethodKind::GOAL;
    if (up == "OAL") return MethodKind::OAL;
    if (up == "LASSO") return MethodKind::LASSO;
    return std::nullopt;
}

struct MethodSpec {
    MethodKind kind = MethodKind::GOAL;
    double gamma = 3.0;  // unused by LASSO

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// IPTW variant used by iptw_ate; recorded in output metadata.
inline constexpr std::string_view kIptwVariant = "hajek";

inline constexpr double kSelectionTolerance = 1e-8;
inline constexpr double kPropensityClip = 1e-6;

struct AteEstimate {
    double ate = 0.0;
    MethodSpec method;
    std::vector<Index> selected;  // 0-based covariate indices
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vector ps;                    // clipped propensities of the selected fit
    CoefficientVector alpha_hat;
    double wamd = 0.0;
    int candidates_converged = 0;
};

struct EstimatorOptions {
    double tol = 1e-8;
    int max_sweeps = 10000;
    double support_tol = kSelectionTolerance;
};

/// { j : |alpha_j| > tol }
inline std::vector<Index> selected_support(const CoefficientVector& alpha, double tol = kSelectionTolerance) {
    if (!(tol > 0.0)) throw InvalidArgument("support tolerance must be > 0");
    std::vector<Index> out;
    for (Index j = 0; j < alpha.size(); ++j) {
        if (std::abs(alpha[j]) > tol) out.push_back(j);
    }
    return out;
}

inline Vector clip_propensity(Vector ps, double eps = kPropensityClip) {
    for (Index i = 0; i < ps.size(); ++i) ps[i] = std::clamp(ps[i], eps, 1.0 - eps);
    return ps;
}

namespace detail {

struct ArmCounts {
    Index treated = 0;
    Index control = 0;
};

inline ArmCounts check_arms_and_ps(const Dataset& d, const Vector& ps) {
    require_dims(ps.size() == d.n() && d.A.size() == d.n(), "propensity vector length differs from number of rows");
    ArmCounts c;
    for (Index i = 0; i < d.n(); ++i) {
        if (!(ps[i] > 0.0 && ps[i] < 1.0))
            throw NonFiniteWeight("propensity score of row " + std::to_string(i + 1) + " is not inside (0, 1)");
        if (d.A[i] == 1.0) ++c.treated;
        else ++c.control;
    }
    if (c.treated == 0 || c.control == 0) throw DegenerateArm("one treatment arm is empty");
    return c;
}

} // namespace detail

/// Weighted absolute mean difference: sum_j |beta_j| * |weighted mean gap of
/// x_j between arms| / sd(x_j), with unit weights a/ps + (1-a)/(1-ps).
inline double wamd(const Dataset& d, const Vector& ps, const OlsFit& ols) {
    detail::check_arms_and_ps(d, ps);
    detail::require_dims(ols.beta.size() == d.p(), "outcome coefficients length differs from number of covariates");

    const Index n = d.n();
    Vector w1 = Vector::Zero(n);
    Vector w0 = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
        if (d.A[i] == 1.0) w1[i] = 1.0 / ps[i];
        else w0[i] = 1.0 / (1.0 - ps[i]);
    }
    const double s1 = w1.sum();
    const double s0 = w0.sum();
    const Vector mean1 = d.X.transpose() * w1 / s1;
    const Vector mean0 = d.X.transpose() * w0 / s0;

    double total = 0.0;
    for (Index j = 0; j < d.p(); ++j) {
        if (n < 2) break;
        const auto col = d.X.col(j);
        const double mu = col.mean();
        const double sd = std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n - 1));
        if (sd == 0.0) continue;  // constant column has no imbalance
        total += std::abs(ols.beta[j]) * std::abs(mean1[j] - mean0[j]) / sd;
    }
    return total;
}

/// Normalized IPTW (Hajek) ATE.
inline double iptw_ate(const Dataset& d, const Vector& ps) {
    detail::check_arms_and_ps(d, ps);
    double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0;
    for (Index i = 0; i < d.n(); ++i) {
        if (d.A[i] == 1.0) {
            num1 += d.Y[i] / ps[i];
            den1 += 1.0 / ps[i];
        } else {
            num0 += d.Y[i] / (1.0 - ps[i]);
            den0 += 1.0 / (1.0 - ps[i]);
        }
    }
    const double ate = num1 / den1 - num0 / den0;
    if (!std::isfinite(ate)) throw NonFiniteWeight("IPTW estimate is not finite");
    return ate;
}

/// L1 weights used by a method: outcome-adaptive for GOAL/OAL, unit for LASSO.
inline Vector method_weights(const MethodSpec& m, const OlsFit& ols) {
    if (m.kind == MethodKind::LASSO) return Vector::Ones(ols.beta.size());
    return compute_weights(ols, m.gamma);
}

/// The grid as the method sees it: lambda2 forced to 0 for OAL and LASSO,
/// duplicates removed, first occurrence kept.
inline std::vector<LambdaPair> effective_grid(const MethodSpec& m, const std::vector<LambdaPair>& grid) {
    std::vector<LambdaPair> out;
    for (LambdaPair pr : grid) {
        if (m.kind != MethodKind::GOAL) pr.lambda2 = 0.0;
        if (std::find(out.begin(), out.end(), pr) == out.end()) out.push_back(pr);
    }
    return out;
}

inline AteEstimate fit_method(const Dataset& d, const MethodSpec& m, const std::vector<LambdaPair>& grid,
                              const EstimatorOptions& opt = {}) {
    if (grid.empty()) throw InvalidArgument("tuning grid is empty");
    if (m.kind != MethodKind::LASSO && !(m.gamma > 1.0)) throw InvalidGamma(m.gamma);

    const OlsFit ols = ols_fit(d);
    const std::vector<LambdaPair> pairs = effective_grid(m, grid);

    PenaltySpec pen;
    pen.weights = method_weights(m, ols);
    pen.gamma = m.kind == MethodKind::LASSO ? 3.0 : m.gamma;

    // Visit each lambda2 level from the largest lambda1 down, warm-starting
    // every fit from the previous solution on that level.
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::vector<double> levels;
    for (const auto& pr : pairs) {
        if (std::find(levels.begin(), levels.end(), pr.lambda2) == levels.end()) levels.push_back(pr.lambda2);
    }
    auto level_of = [&](std::size_t k) {
        return std::find(levels.begin(), levels.end(), pairs[k].lambda2) - levels.begin();
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto la = level_of(a);
        const auto lb = level_of(b);
        if (la != lb) return la < lb;
        return pairs[a].lambda1 > pairs[b].lambda1;
    });

    AteEstimate best;
    best.method = m;
    bool have_best = false;
    std::size_t best_index = 0;

    CoefficientVector warm = CoefficientVector::Zero(d.p());
    std::ptrdiff_t current_level = -1;
    for (std::size_t k : order) {
        if (level_of(k) != current_level) {
            current_level = level_of(k);
            warm.setZero();
        }
        pen.lambda1 = pairs[k].lambda1;
        pen.lambda2 = pairs[k].lambda2;
        FitResult res = fit(d, pen, warm, opt.tol, opt.max_sweeps);
        warm = res.alpha_hat;
        if (!res.converged) continue;
        ++best.candidates_converged;

        Vector ps = clip_propensity(propensity(d, res.alpha_hat));
        const double score_value = wamd(d, ps, ols);
        if (!have_best || score_value < best.wamd || (score_value == best.wamd && k < best_index)) {
            have_best = true;
            best_index = k;
            best.wamd = score_value;
            best.lambda1 = pen.lambda1;
            best.lambda2 = pen.lambda2;
            best.ps = std::move(ps);
            best.alpha_hat = std::move(res.alpha_hat);
        }
    }
    if (!have_best) throw NoConvergedCandidate(std::string(to_string(m.kind)) + ": no grid point converged");

    best.selected = selected_support(best.alpha_hat, opt.support_tol);
    best.ate = iptw_ate(d, best.ps);
    return best;
}

} // namespace goal

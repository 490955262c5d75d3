#pragma once

// Minimizes
//
//   l_n(alpha) + lambda1 * sum_j w_j |alpha_j| + lambda2 * sum_j alpha_j^2
//
// GOAL, OAL and the plain lasso are all instances with different (lambda2, w).
//
// Two algorithms share the same contract:
//  - MajorizedCD: cyclic coordinate descent on the quadratic majorizer built
//    from the global bound phi'' <= 1/4. Every update is an exact minimizer of
//    a majorizer, so the objective never increases.
//  - ProximalNewton (default): a quadratic model with the exact Hessian
//    X'WX is minimized by coordinate descent over its Gram matrix, then an
//    Armijo backtracking search along the resulting direction is run on the
//    true objective. If backtracking fails, one MajorizedCD sweep is taken
//    instead, so descent is unconditional here as well.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "goal/model.hpp"

namespace goal {

struct PenaltySpec {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    Vector weights;       // +inf pins the coordinate at zero
    double gamma = 3.0;   // exponent the weights were built with; informational
};

inline void validate(const PenaltySpec& pen, Index p) {
    if (!(pen.lambda1 >= 0.0) || !std::isfinite(pen.lambda1)) throw InvalidArgument("lambda1 must be finite and >= 0");
    if (!(pen.lambda2 >= 0.0) || !std::isfinite(pen.lambda2)) throw InvalidArgument("lambda2 must be finite and >= 0");
    if (!(pen.gamma > 1.0)) throw InvalidGamma(pen.gamma);
    detail::require_dims(pen.weights.size() == p, "penalty weight vector length differs from number of covariates");
    for (Index j = 0; j < p; ++j) {
        if (!(pen.weights[j] >= 0.0)) throw InvalidArgument("penalty weights must be >= 0 (inf allowed)");
    }
}

inline PenaltySpec unit_penalty(Index p, double lambda1, double lambda2 = 0.0) {
    return PenaltySpec{lambda1, lambda2, Vector::Ones(p), 3.0};
}

enum class SolverAlgorithm { ProximalNewton, MajorizedCD };

struct FitResult {
    CoefficientVector alpha_hat;
    double objective = 0.0;
    int iterations = 0;           // outer iterations (Newton) or full sweeps (MajorizedCD)
    bool converged = false;
    double kkt_residual = 0.0;
    std::vector<double> objective_trace;  // objective at init, then after each iteration
};

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

namespace detail {

inline bool pinned(double w) { return std::isinf(w); }

inline double penalty_value(const CoefficientVector& alpha, const PenaltySpec& pen) {
    double l1 = 0.0;
    double l2 = 0.0;
    for (Index j = 0; j < alpha.size(); ++j) {
        if (alpha[j] == 0.0) continue;
        if (pinned(pen.weights[j])) return std::numeric_limits<double>::infinity();
        l1 += pen.weights[j] * std::abs(alpha[j]);
        l2 += alpha[j] * alpha[j];
    }
    return pen.lambda1 * l1 + pen.lambda2 * l2;
}

inline double nll_from_eta(const Vector& eta, const Vector& a) {
    double total = 0.0;
    for (Index i = 0; i < eta.size(); ++i) total += phi(eta[i]) - a[i] * eta[i];
    return total;
}

// Stationarity violation given the smooth-part gradient g at alpha.
inline double kkt_from_score(const Vector& g, const CoefficientVector& alpha, const PenaltySpec& pen) {
    double worst = 0.0;
    for (Index j = 0; j < alpha.size(); ++j) {
        const double w = pen.weights[j];
        if (pinned(w)) continue;
        const double smooth = g[j] + 2.0 * pen.lambda2 * alpha[j];
        const double thr = pen.lambda1 * w;
        double v;
        if (alpha[j] != 0.0) {
            v = std::abs(smooth + thr * (alpha[j] > 0.0 ? 1.0 : -1.0));
        } else {
            v = std::max(std::abs(smooth) - thr, 0.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

// Iterate shared by both algorithms; eta = X alpha, resid = phi'(eta) - a.
class SolverState {
public:
    SolverState(const Dataset& d, const PenaltySpec& pen, CoefficientVector init)
        : d_(d), pen_(pen), alpha_(std::move(init)) {
        for (Index j = 0; j < alpha_.size(); ++j) {
            if (pinned(pen_.weights[j])) alpha_[j] = 0.0;
        }
        eta_ = d_.X * alpha_;
        resid_.resize(d_.n());
        refresh_resid();
        curvature_bound_ = 0.25 * d_.X.colwise().squaredNorm().transpose();
        objective_ = evaluate();
    }

    const CoefficientVector& alpha() const { return alpha_; }
    const Vector& eta() const { return eta_; }
    double objective() const { return objective_; }
    Vector gradient() const { return d_.X.transpose() * resid_; }
    double kkt() const { return kkt_from_score(gradient(), alpha_, pen_); }

    // One cyclic pass of majorized coordinate updates. Returns whether any
    // coefficient changed.
    bool majorized_sweep() {
        bool moved = false;
        for (Index j = 0; j < alpha_.size(); ++j) {
            const double w = pen_.weights[j];
            if (pinned(w)) continue;
            const double old = alpha_[j];
            double updated = 0.0;
            const double v = curvature_bound_[j];
            if (v > 0.0) {
                const double g = d_.X.col(j).dot(resid_);
                updated = soft_threshold(v * old - g, pen_.lambda1 * w) / (v + 2.0 * pen_.lambda2);
            }
            if (updated == old) continue;
            alpha_[j] = updated;
            eta_.noalias() += (updated - old) * d_.X.col(j);
            refresh_resid();
            moved = true;
        }
        objective_ = evaluate();
        return moved;
    }

    // Accepts a point whose linear predictor and objective the caller computed.
    void move_to(const CoefficientVector& alpha, const Vector& eta, double objective) {
        alpha_ = alpha;
        eta_ = eta;
        refresh_resid();
        objective_ = objective;
    }

    double objective_at(const CoefficientVector& alpha, const Vector& eta) const {
        const double pen_value = penalty_value(alpha, pen_);
        if (!std::isfinite(pen_value)) return pen_value;
        return nll_from_eta(eta, d_.A) + pen_value;
    }

    const Vector& resid() const { return resid_; }

private:
    void refresh_resid() {
        for (Index i = 0; i < d_.n(); ++i) resid_[i] = phi1(eta_[i]) - d_.A[i];
    }

    double evaluate() const {
        const double value = objective_at(alpha_, eta_);
        if (!std::isfinite(value))
            throw NonFiniteObjective("penalized objective became non-finite; check covariate scaling");
        return value;
    }

    const Dataset& d_;
    const PenaltySpec& pen_;
    CoefficientVector alpha_;
    Vector eta_;
    Vector resid_;
    Vector curvature_bound_;
    double objective_ = 0.0;
};

// Inexact Newton: the inner solve stops early; more sweeps on an
// ill-conditioned Hessian cost more than the extra outer iterations they save.
inline constexpr int kInnerSweeps = 200;

// Coordinate descent on  g'(a - base) + 1/2 (a - base)' H (a - base) + penalty.
// Returns the minimizer's approximation, starting from base.
inline CoefficientVector solve_quadratic_model(const Matrix& H, const Vector& g, const CoefficientVector& base,
                                               const PenaltySpec& pen, double target_kkt, int max_sweeps) {
    const Index p = base.size();
    CoefficientVector a = base;
    Vector grad = g;  // gradient of the smooth model part at a
    const double floor = 1e-12 * std::max(1.0, H.diagonal().maxCoeff());

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        for (Index j = 0; j < p; ++j) {
            const double w = pen.weights[j];
            if (pinned(w)) continue;
            const double h = std::max(H(j, j), floor);
            const double old = a[j];
            const double updated = soft_threshold(h * old - grad[j], pen.lambda1 * w) / (h + 2.0 * pen.lambda2);
            if (updated == old) continue;
            grad.noalias() += (updated - old) * H.col(j);
            a[j] = updated;
            moved = true;
        }
        if (!moved || kkt_from_score(grad, a, pen) <= target_kkt) break;
    }
    return a;
}

} // namespace detail

inline double penalized_objective(const Dataset& d, const CoefficientVector& alpha, const PenaltySpec& pen) {
    detail::check_alpha(d, alpha);
    detail::require_dims(pen.weights.size() == d.p(), "penalty weight vector length differs from number of covariates");
    const double pen_value = detail::penalty_value(alpha, pen);
    return neg_log_likelihood(d, alpha) + pen_value;
}

inline double kkt_residual(const Dataset& d, const CoefficientVector& alpha, const PenaltySpec& pen) {
    detail::require_dims(pen.weights.size() == d.p(), "penalty weight vector length differs from number of covariates");
    return detail::kkt_from_score(score(d, alpha), alpha, pen);
}

/// Convergence threshold applied to kkt_residual.
inline double kkt_tolerance(const PenaltySpec& pen) { return 1e-6 * (1.0 + pen.lambda1); }

/// Runs until the relative objective decrease of an iteration is <= tol and
/// the KKT residual is <= kkt_tolerance(pen), or max_sweeps iterations pass.
inline FitResult fit(const Dataset& d, const PenaltySpec& pen, const CoefficientVector& init, double tol = 1e-8,
                     int max_sweeps = 10000, SolverAlgorithm algorithm = SolverAlgorithm::ProximalNewton) {
    detail::check_alpha(d, init);
    validate(pen, d.p());
    if (!(tol > 0.0)) throw InvalidArgument("tol must be > 0");
    if (max_sweeps < 1) throw InvalidArgument("max_sweeps must be >= 1");

    detail::SolverState state(d, pen, init);
    FitResult out;
    out.objective_trace.push_back(state.objective());
    const double kkt_tol = kkt_tolerance(pen);

    Vector root_w(d.n());
    Matrix H(d.p(), d.p());

    int iter = 0;
    while (iter < max_sweeps) {
        ++iter;
        const double before = state.objective();
        bool moved = false;

        if (algorithm == SolverAlgorithm::MajorizedCD) {
            moved = state.majorized_sweep();
        } else {
            const Vector g = state.gradient();
            const double kkt_now = detail::kkt_from_score(g, state.alpha(), pen);
            for (Index i = 0; i < d.n(); ++i) root_w[i] = std::sqrt(phi2(state.eta()[i]));
            const Matrix Xw = d.X.array().colwise() * root_w.array();
            H.setZero();
            H.selfadjointView<Eigen::Lower>().rankUpdate(Xw.transpose());
            H.triangularView<Eigen::StrictlyUpper>() = H.transpose().eval();

            const CoefficientVector target = detail::solve_quadratic_model(
                H, g, state.alpha(), pen, 1e-3 * kkt_now, detail::kInnerSweeps);
            const CoefficientVector dir = target - state.alpha();

            if (dir.cwiseAbs().maxCoeff() > 0.0) {
                const Vector x_dir = d.X * dir;
                const double pen_now = detail::penalty_value(state.alpha(), pen);
                const double decrease = g.dot(dir) + detail::penalty_value(target, pen) - pen_now;
                double step = 1.0;
                bool accepted = false;
                if (decrease < 0.0) {
                    for (int k = 0; k < 60; ++k, step *= 0.5) {
                        const CoefficientVector trial = state.alpha() + step * dir;
                        const Vector trial_eta = state.eta() + step * x_dir;
                        const double value = state.objective_at(trial, trial_eta);
                        if (std::isfinite(value) && value <= before + 1e-4 * step * decrease) {
                            state.move_to(trial, trial_eta, value);
                            accepted = true;
                            moved = true;
                            break;
                        }
                    }
                }
                if (!accepted) moved = state.majorized_sweep();
            }
        }

        const double after = state.objective();
        out.objective_trace.push_back(after);
        const double rel_decrease = (before - after) / std::max(std::abs(before), 1e-300);

        // Relative decrease alone can stall above the KKT threshold when the
        // objective is large, so both criteria gate termination.
        if (rel_decrease <= tol || !moved) {
            out.kkt_residual = state.kkt();
            if (out.kkt_residual <= kkt_tol) {
                out.converged = true;
                break;
            }
            if (!moved) break;
        }
    }

    if (!out.converged) out.kkt_residual = state.kkt();
    out.alpha_hat = state.alpha();
    out.objective = state.objective();
    out.iterations = iter;
    return out;
}

} // namespace goal

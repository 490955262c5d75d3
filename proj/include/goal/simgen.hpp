#pragma once

// Synthetic data: equicorrelated standard Gaussian covariates, Bernoulli
// treatment from a linear logit, Gaussian-noise linear outcome.

#include <bit>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "goal/model.hpp"
#include "goal/rng.hpp"

namespace goal {

enum class Role { Confounder, OutcomePredictor, TreatmentPredictor, Spurious };

inline std::string_view to_string(Role r) {
    switch (r) {
        case Role::Confounder: return "confounder";
        case Role::OutcomePredictor: return "outcome_predictor";
        case Role::TreatmentPredictor: return "treatment_predictor";
        case Role::Spurious: return "spurious";
    }
    return "?";
}

struct Scenario {
    Index n = 100;
    double rho = 0.0;
    Index q = 3;
    Index p = 35;
    Vector alpha_star;
    Vector beta_star;
    double beta_A = 0.0;
    std::uint64_t seed = 0;
};

using RoleMap = std::vector<Role>;

/// Default block coefficients: q confounders (0.6, 0.6), q pure outcome
/// predictors (0, 0.6), q pure treatment predictors (0.1, 0), rest zero.
struct BlockCoefficients {
    double confounder_alpha = 0.6;
    double confounder_beta = 0.6;
    double outcome_beta = 0.6;
    double treatment_alpha = 0.1;
};

inline void fill_blocks(Scenario& s, const BlockCoefficients& c = {}) {
    s.alpha_star = Vector::Zero(s.p);
    s.beta_star = Vector::Zero(s.p);
    for (Index j = 0; j < s.q; ++j) {
        s.alpha_star[j] = c.confounder_alpha;
        s.beta_star[j] = c.confounder_beta;
        s.beta_star[s.q + j] = c.outcome_beta;
        s.alpha_star[2 * s.q + j] = c.treatment_alpha;
    }
}

inline void validate(const Scenario& s) {
    if (s.n < 2) throw InvalidScenario("scenario n must be >= 2");
    if (!(s.rho >= 0.0 && s.rho < 1.0)) throw InvalidScenario("scenario rho must lie in [0, 1)");
    if (s.q < 1) throw InvalidScenario("scenario q must be >= 1");
    if (s.p < 3 * s.q) throw InvalidScenario("scenario needs p >= 3q");
    if (s.alpha_star.size() != s.p || s.beta_star.size() != s.p)
        throw InvalidScenario("alpha_star and beta_star must have length p");
    if (!s.alpha_star.allFinite() || !s.beta_star.allFinite() || !std::isfinite(s.beta_A))
        throw InvalidScenario("scenario coefficients must be finite");
}

/// p = floor(4 sqrt(n) - 5), q = floor(p / 9), beta_A = 0, default blocks.
inline Scenario paper_scenario(Index n, double rho, std::uint64_t seed) {
    const double raw = 4.0 * std::sqrt(static_cast<double>(n)) - 5.0;
    const auto p = static_cast<Index>(std::floor(raw));
    if (n < 2 || p < 9) throw InvalidScenario("n = " + std::to_string(n) + " gives fewer than 9 covariates");
    Scenario s;
    s.n = n;
    s.rho = rho;
    s.p = p;
    s.q = p / 9;
    s.beta_A = 0.0;
    s.seed = seed;
    fill_blocks(s);
    validate(s);
    return s;
}

inline RoleMap roles(const Scenario& s) {
    RoleMap out(static_cast<std::size_t>(s.p));
    for (Index j = 0; j < s.p; ++j) {
        const bool a = s.alpha_star[j] != 0.0;
        const bool b = s.beta_star[j] != 0.0;
        out[static_cast<std::size_t>(j)] = a && b ? Role::Confounder
                                          : b    ? Role::OutcomePredictor
                                          : a    ? Role::TreatmentPredictor
                                                 : Role::Spurious;
    }
    return out;
}

inline bool is_active(Role r) { return r == Role::Confounder || r == Role::OutcomePredictor; }

/// Indices of confounders and pure outcome predictors, ascending.
inline std::vector<Index> active_set(const Scenario& s) {
    std::vector<Index> out;
    const RoleMap rm = roles(s);
    for (std::size_t j = 0; j < rm.size(); ++j) {
        if (is_active(rm[j])) out.push_back(static_cast<Index>(j));
    }
    return out;
}

inline std::vector<Index> inactive_set(const Scenario& s) {
    std::vector<Index> out;
    const RoleMap rm = roles(s);
    for (std::size_t j = 0; j < rm.size(); ++j) {
        if (!is_active(rm[j])) out.push_back(static_cast<Index>(j));
    }
    return out;
}

/// X_ij = sqrt(rho) Z_i0 + sqrt(1 - rho) Z_ij, drawn row by row.
inline Matrix sample_covariates(Index n, Index p, double rho, Rng& rng) {
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);
    Matrix X(n, p);
    for (Index i = 0; i < n; ++i) {
        const double z0 = rng.normal();
        for (Index j = 0; j < p; ++j) X(i, j) = shared * z0 + own * rng.normal();
    }
    return X;
}

inline Matrix sample_covariates(const Scenario& s, Rng& rng) { return sample_covariates(s.n, s.p, s.rho, rng); }

inline Vector sample_treatment(const Matrix& X, const Vector& alpha_star, Rng& rng) {
    detail::require_dims(alpha_star.size() == X.cols(), "alpha_star length differs from number of covariates");
    const Vector eta = X * alpha_star;
    Vector A(X.rows());
    for (Index i = 0; i < X.rows(); ++i) A[i] = rng.bernoulli(phi1(eta[i])) ? 1.0 : 0.0;
    return A;
}

inline Vector sample_outcome(const Matrix& X, const Vector& A, double beta_A, const Vector& beta_star, Rng& rng,
                             bool noiseless = false) {
    detail::require_dims(beta_star.size() == X.cols(), "beta_star length differs from number of covariates");
    detail::require_dims(A.size() == X.rows(), "treatment length differs from number of rows");
    Vector Y = beta_A * A + X * beta_star;
    if (!noiseless) {
        for (Index i = 0; i < Y.size(); ++i) Y[i] += rng.normal();
    }
    return Y;
}

/// Dataset for replication r (1-based), seeded with child_seed(s.seed, r).
/// Draw order: covariates, treatment, outcome noise.
inline Dataset generate_dataset(const Scenario& s, std::uint64_t replication) {
    validate(s);
    Rng rng(child_seed(s.seed, replication));
    Dataset d;
    d.X = sample_covariates(s, rng);
    d.A = sample_treatment(d.X, s.alpha_star, rng);
    d.Y = sample_outcome(d.X, d.A, s.beta_A, s.beta_star, rng);
    return d;
}

namespace detail {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;

    void bytes(const void* data, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
};

} // namespace detail

inline std::uint64_t scenario_hash(const Scenario& s) {
    detail::Fnv1a f;
    f.u64(static_cast<std::uint64_t>(s.n));
    f.f64(s.rho);
    f.u64(static_cast<std::uint64_t>(s.q));
    f.u64(static_cast<std::uint64_t>(s.p));
    for (Index j = 0; j < s.alpha_star.size(); ++j) f.f64(s.alpha_star[j]);
    for (Index j = 0; j < s.beta_star.size(); ++j) f.f64(s.beta_star[j]);
    f.f64(s.beta_A);
    f.u64(s.seed);
    return f.h;
}

inline std::uint64_t dataset_checksum(const Dataset& d) {
    detail::Fnv1a f;
    f.u64(static_cast<std::uint64_t>(d.n()));
    f.u64(static_cast<std::uint64_t>(d.p()));
    f.bytes(d.X.data(), static_cast<std::size_t>(d.X.size()) * sizeof(double));
    f.bytes(d.A.data(), static_cast<std::size_t>(d.A.size()) * sizeof(double));
    f.bytes(d.Y.data(), static_cast<std::size_t>(d.Y.size()) * sizeof(double));
    return f.h;
}

} // namespace goal

#pragma once

// Monte Carlo replications over a scenario: paired method comparison on a
// shared dataset per replication, bias/SE/MSE aggregation, selection
// proportions, and oracle-property diagnostics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "goal/estimators.hpp"
#include "goal/simgen.hpp"

namespace goal {

struct HarnessOptions {
    int workers = 1;
    EstimatorOptions estimator;
    std::optional<std::vector<LambdaPair>> grid;  // default: lambda_grid(n)
};

struct MethodOutcome {
    bool ok = false;
    double ate = 0.0;
    std::vector<Index> selected;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::string error;
};

struct ReplicationRecord {
    std::uint64_t replication = 0;
    std::uint64_t checksum = 0;               // dataset every method consumed
    std::vector<std::uint64_t> input_checksums;  // one per method, taken at fit time
    std::vector<MethodOutcome> outcomes;
};

struct AteSummary {
    double bias = 0.0;
    double se = 0.0;
    double mse = 0.0;
};

struct ReplicationSummary {
    MethodSpec method;
    double bias = 0.0;
    double se = 0.0;
    double mse = 0.0;
    std::vector<double> selection_prop;
    double support_recovery_rate = 0.0;
    int n_replications = 0;
    int n_failed = 0;
};

/// bias = mean - truth, se = sample SD (n - 1), mse = mean squared error
/// about the truth.
inline AteSummary summarize(std::span<const double> ates, double truth) {
    AteSummary out;
    const auto m = ates.size();
    if (m == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan};
    }
    double mean = 0.0;
    for (double a : ates) mean += a;
    mean /= static_cast<double>(m);
    double ss = 0.0, sq = 0.0;
    for (double a : ates) {
        ss += (a - mean) * (a - mean);
        sq += (a - truth) * (a - truth);
    }
    out.bias = mean - truth;
    out.se = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
    out.mse = sq / static_cast<double>(m);
    return out;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; the first exception is rethrown after all threads join.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
    if (workers < 1) throw InvalidArgument("workers must be >= 1");
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline std::vector<LambdaPair> harness_grid(const Scenario& s, const HarnessOptions& opt) {
    return opt.grid ? *opt.grid : lambda_grid(s.n);
}

/// One replication: draw the dataset from child seed r, then fit every method
/// on that same dataset. Estimation errors are recorded, not thrown.
inline ReplicationRecord run_replication(const Scenario& s, const std::vector<MethodSpec>& methods,
                                         std::uint64_t r, const std::vector<LambdaPair>& grid,
                                         const EstimatorOptions& est = {}) {
    ReplicationRecord rec;
    rec.replication = r;
    const Dataset d = generate_dataset(s, r);
    rec.checksum = dataset_checksum(d);
    for (const auto& m : methods) {
        rec.input_checksums.push_back(dataset_checksum(d));
        MethodOutcome o;
        try {
            AteEstimate e = fit_method(d, m, grid, est);
            o.ok = true;
            o.ate = e.ate;
            o.selected = std::move(e.selected);
            o.lambda1 = e.lambda1;
            o.lambda2 = e.lambda2;
        } catch (const Error& ex) {
            o.error = ex.what();
        }
        rec.outcomes.push_back(std::move(o));
    }
    return rec;
}

/// Folds replication records (in replication order) into one summary per
/// method. Throws TooManyFailures when any method fails in more than R/10.
inline std::vector<ReplicationSummary> aggregate(const Scenario& s, const std::vector<MethodSpec>& methods,
                                                 const std::vector<ReplicationRecord>& records) {
    const auto R = static_cast<int>(records.size());
    const std::vector<Index> active = active_set(s);
    std::vector<ReplicationSummary> out;
    for (std::size_t k = 0; k < methods.size(); ++k) {
        ReplicationSummary sum;
        sum.method = methods[k];
        sum.n_replications = R;
        sum.selection_prop.assign(static_cast<std::size_t>(s.p), 0.0);
        std::vector<double> ates;
        int recovered = 0;
        for (const auto& rec : records) {
            const MethodOutcome& o = rec.outcomes[k];
            if (!o.ok) {
                ++sum.n_failed;
                continue;
            }
            ates.push_back(o.ate);
            for (Index j : o.selected) sum.selection_prop[static_cast<std::size_t>(j)] += 1.0;
            if (o.selected == active) ++recovered;
        }
        if (10 * sum.n_failed > R)
            throw TooManyFailures(std::string(to_string(sum.method.kind)) + " failed in " +
                                  std::to_string(sum.n_failed) + " of " + std::to_string(R) + " replications");
        const auto ok = static_cast<double>(ates.size());
        if (ok > 0) {
            for (auto& v : sum.selection_prop) v /= ok;
            sum.support_recovery_rate = recovered / ok;
        }
        const AteSummary a = summarize(ates, s.beta_A);
        sum.bias = a.bias;
        sum.se = a.se;
        sum.mse = a.mse;
        out.push_back(std::move(sum));
    }
    return out;
}

inline std::vector<ReplicationRecord> run_records(const Scenario& s, const std::vector<MethodSpec>& methods, int R,
                                                  const HarnessOptions& opt = {}) {
    validate(s);
    if (R < 2) throw InvalidArgument("replications must be >= 2");
    if (methods.empty()) throw InvalidArgument("no methods requested");
    const std::vector<LambdaPair> grid = harness_grid(s, opt);
    std::vector<ReplicationRecord> records(static_cast<std::size_t>(R));
    parallel_for(records.size(), opt.workers, [&](std::size_t i) {
        records[i] = run_replication(s, methods, i + 1, grid, opt.estimator);
    });
    return records;
}

inline std::vector<ReplicationSummary> run_replications(const Scenario& s, const std::vector<MethodSpec>& methods,
                                                        int R, const HarnessOptions& opt = {}) {
    return aggregate(s, methods, run_records(s, methods, R, opt));
}

struct CoordinateMoments {
    Index index = 0;                 // 0-based covariate index
    double mean = 0.0;               // of sqrt(n) (alpha_hat_j - alpha*_j)
    double mean_se = 0.0;            // Monte Carlo SE of that mean
    double variance = 0.0;           // sample variance (R - 1)
    double reference_variance = 0.0; // (F11^-1)_jj
    double variance_ratio() const { return variance / reference_variance; }
};

struct OracleDiagnostics {
    Index n = 0;
    int n_replications = 0;
    int n_failed = 0;
    double zero_recovery_rate = 0.0;
    double nonzero_recovery_rate = 0.0;
    std::vector<CoordinateMoments> standardized_moments;
};

inline constexpr Index kReferenceSampleSize = 100000;

/// Active block of the per-unit Fisher information at alpha*, estimated on a
/// reference draw of kReferenceSampleSize rows (replication index 0, which the
/// Monte Carlo replications never use).
inline Matrix reference_f11(const Scenario& s, Index reference_n = kReferenceSampleSize) {
    Scenario big = s;
    big.n = reference_n;
    const Dataset ref = generate_dataset(big, 0);
    const std::vector<Index> active = active_set(s);
    return fisher_information(ref, s.alpha_star, active).F11;
}

struct OracleOptions {
    int workers = 1;
    double gamma = 3.0;
    bool use_schedule = true;
    EstimatorOptions estimator;
    Index reference_n = kReferenceSampleSize;
};

inline OracleDiagnostics oracle_diagnostics(const Scenario& s, int R, const OracleOptions& opt = {}) {
    validate(s);
    if (R < 50) throw InvalidArgument("oracle diagnostics need at least 50 replications");
    const std::vector<Index> active = active_set(s);
    const std::vector<Index> inactive = inactive_set(s);
    const MethodSpec goal{MethodKind::GOAL, opt.gamma};
    const std::vector<LambdaPair> grid = lambda_grid(s.n);

    struct Draw {
        bool ok = false;
        CoefficientVector alpha;
    };
    std::vector<Draw> draws(static_cast<std::size_t>(R));
    parallel_for(draws.size(), opt.workers, [&](std::size_t i) {
        const Dataset d = generate_dataset(s, i + 1);
        Draw& out = draws[i];
        try {
            if (opt.use_schedule) {
                const OlsFit ols = ols_fit(d);
                PenaltySpec pen;
                const LambdaPair lam = lambda_schedule(s.n, opt.gamma);
                pen.lambda1 = lam.lambda1;
                pen.lambda2 = lam.lambda2;
                pen.weights = compute_weights(ols, opt.gamma);
                pen.gamma = opt.gamma;
                FitResult res = fit(d, pen, CoefficientVector::Zero(d.p()), opt.estimator.tol, opt.estimator.max_sweeps);
                if (!res.converged) return;
                out.alpha = std::move(res.alpha_hat);
            } else {
                out.alpha = fit_method(d, goal, grid, opt.estimator).alpha_hat;
            }
            out.ok = true;
        } catch (const Error&) {
            // counted as a failed replication below
        }
    });

    OracleDiagnostics diag;
    diag.n = s.n;
    diag.n_replications = R;
    std::vector<const CoefficientVector*> ok;
    for (const auto& dr : draws) {
        if (dr.ok) ok.push_back(&dr.alpha);
        else ++diag.n_failed;
    }
    if (10 * diag.n_failed > R)
        throw TooManyFailures("oracle diagnostics: " + std::to_string(diag.n_failed) + " of " + std::to_string(R) +
                              " fits did not converge");

    const double tol = opt.estimator.support_tol;
    int zero_ok = 0, nonzero_ok = 0;
    for (const auto* a : ok) {
        bool z = true, nz = true;
        for (Index j : inactive) z = z && std::abs((*a)[j]) <= tol;
        for (Index j : active) nz = nz && std::abs((*a)[j]) > tol;
        zero_ok += z;
        nonzero_ok += nz;
    }
    const auto m = static_cast<double>(ok.size());
    diag.zero_recovery_rate = zero_ok / m;
    diag.nonzero_recovery_rate = nonzero_ok / m;

    if (!active.empty()) {
        const Matrix F11 = reference_f11(s, opt.reference_n);
        const Matrix inv = F11.ldlt().solve(Matrix::Identity(F11.rows(), F11.cols()));
        const double root_n = std::sqrt(static_cast<double>(s.n));
        for (std::size_t k = 0; k < active.size(); ++k) {
            const Index j = active[k];
            std::vector<double> z;
            z.reserve(ok.size());
            for (const auto* a : ok) z.push_back(root_n * ((*a)[j] - s.alpha_star[j]));
            const AteSummary st = summarize(z, 0.0);
            CoordinateMoments cm;
            cm.index = j;
            cm.mean = st.bias;
            cm.variance = st.se * st.se;
            cm.mean_se = st.se / std::sqrt(m);
            cm.reference_variance = inv(static_cast<Index>(k), static_cast<Index>(k));
            diag.standardized_moments.push_back(cm);
        }
    }
    return diag;
}

} // namespace goal

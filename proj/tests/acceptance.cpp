// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Criteria 5-7 share one simulation of the comparison grid.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "goal/goal.hpp"
#include "oracles.hpp"

using namespace goal;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& sub, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("criterion %d%s: %s | %s\n", id, sub.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Dataset to_dataset(const oracle::Instance& inst) {
    return make_dataset(inst.X, inst.a, Vector::Zero(inst.X.rows()));
}

ScenarioFile config(const std::string& name) {
    return load_scenario_file(std::string(GOAL_SOURCE_DIR) + "/configs/" + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void solver_correctness() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<int> pick_n(5, 40), pick_p(1, 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad_obj = 0, bad_kkt = 0;
    double worst_gap = -1e300, worst_kkt = 0.0;
    for (int k = 0; k < 200; ++k) {
        const int n = pick_n(gen), p = pick_p(gen);
        const auto inst = oracle::random_instance(gen, n, p);
        PenaltySpec pen;
        pen.lambda1 = 2.0 * u(gen);
        pen.lambda2 = u(gen);
        pen.weights = Vector(p);
        for (int j = 0; j < p; ++j) pen.weights[j] = 0.1 + 9.9 * u(gen);
        const FitResult r = fit(to_dataset(inst), pen, Vector::Zero(p));
        const double best =
            oracle::grid_min_convex(inst.X, inst.a, pen.lambda1, pen.weights, pen.lambda2, -4.0, 4.0, 0.02);
        const double obj = oracle::objective(inst.X, inst.a, r.alpha_hat, pen.lambda1, pen.weights, pen.lambda2);
        worst_gap = std::max(worst_gap, obj - best);
        worst_kkt = std::max(worst_kkt, r.kkt_residual / kkt_tolerance(pen));
        bad_obj += !(obj <= best + 1e-3);
        bad_kkt += !(r.kkt_residual <= kkt_tolerance(pen));
    }
    const double t = seconds_since(t0);
    report(1, "", bad_obj == 0 && bad_kkt == 0 && t < 60.0,
           fmt("200 instances, objective above grid min + 1e-3: %d, KKT violations: %d, max(obj - grid min) = %.3g, "
               "max KKT / tolerance = %.3g, %.1f s",
               bad_obj, bad_kkt, worst_gap, worst_kkt, t));
}

void mle_reduction() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(202);
    std::uniform_int_distribution<int> pick_n(50, 200), pick_p(1, 5);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto inst = oracle::random_instance(gen, pick_n(gen), pick_p(gen), 0.5);
        const int p = static_cast<int>(inst.X.cols());
        const FitResult r = fit(to_dataset(inst), unit_penalty(p, 0.0, 0.0), Vector::Zero(p));
        const oracle::Vec ref = oracle::newton_mle(inst.X, inst.a);
        worst = std::max(worst, (r.alpha_hat - ref).cwiseAbs().maxCoeff());
    }
    const double t = seconds_since(t0);
    report(2, "", worst <= 1e-5 && t < 10.0, fmt("50 instances, max |alpha - newton| = %.3g, %.2f s", worst, t));
}

std::vector<OracleDiagnostics> selection_consistency() {
    const auto t0 = Clock::now();
    const ScenarioFile file = config("oracle_grid.cfg");
    OracleOptions opt;
    opt.gamma = 3.0;
    opt.use_schedule = true;
    std::vector<OracleDiagnostics> diags;
    for (const auto& s : file.scenarios) diags.push_back(oracle_diagnostics(s, 200, opt));
    const double t = seconds_since(t0);
    bool monotone = true;
    std::string rates;
    for (std::size_t i = 0; i < diags.size(); ++i) {
        if (i > 0 && diags[i].zero_recovery_rate < diags[i - 1].zero_recovery_rate - 0.05) monotone = false;
        rates += fmt("%sn=%lld %.3f", i ? ", " : "", static_cast<long long>(diags[i].n), diags[i].zero_recovery_rate);
    }
    const double last = diags.back().zero_recovery_rate;
    report(3, "", monotone && last >= 0.90 && diags.back().n == 1000 && t < 300.0,
           fmt("zero recovery %s (nondecreasing within 0.05: %s), %.1f s", rates.c_str(), monotone ? "yes" : "no", t));
    return diags;
}

void asymptotic_normality() {
    const auto t0 = Clock::now();
    const ScenarioFile file = config("oracle_grid.cfg");
    const Scenario& s = file.scenarios.back();
    const OracleDiagnostics d = oracle_diagnostics(s, 500, OracleOptions{});
    const double t = seconds_since(t0);
    bool ok = s.n == 1000;
    std::string detail;
    double worst_z = 0.0, lo_ratio = 1e300, hi_ratio = 0.0;
    for (const auto& m : d.standardized_moments) {
        const double z = m.mean / m.mean_se;
        const double ratio = m.variance_ratio();
        worst_z = std::max(worst_z, std::abs(z));
        lo_ratio = std::min(lo_ratio, ratio);
        hi_ratio = std::max(hi_ratio, ratio);
        ok = ok && std::abs(z) <= 3.0 && ratio >= 0.7 && ratio <= 1.3;
        detail += fmt(" j=%lld mean=%.3g(se %.3g) var ratio=%.3f;", static_cast<long long>(m.index + 1), m.mean,
                      m.mean_se, ratio);
    }
    report(4, "", ok && t < 600.0,
           fmt("n=1000 R=500 failed=%d, max |mean/se| = %.3g, variance ratio in [%.3f, %.3f], %.1f s;", d.n_failed,
               worst_z, lo_ratio, hi_ratio, t) +
               detail);
}

struct Cell {
    const ReplicationSummary* goal = nullptr;
    const ReplicationSummary* oal = nullptr;
    const ReplicationSummary* lasso = nullptr;
};

Cell cell(const ScenarioResult& r) {
    Cell c;
    for (const auto& s : r.summaries) {
        if (s.method.kind == MethodKind::GOAL) c.goal = &s;
        if (s.method.kind == MethodKind::OAL) c.oal = &s;
        if (s.method.kind == MethodKind::LASSO) c.lasso = &s;
    }
    return c;
}

const ScenarioResult& find(const std::vector<ScenarioResult>& rs, Index n, double rho) {
    for (const auto& r : rs)
        if (r.scenario.n == n && r.scenario.rho == rho) return r;
    throw std::runtime_error("scenario missing from the grid");
}

void table_trends(const std::vector<ScenarioResult>& rs, double t) {
    std::string detail;
    bool halved = true, decreasing = true;
    double prev = INFINITY;
    for (Index n : {100, 200, 400}) {
        const Cell c = cell(find(rs, n, 0.0));
        halved = halved && c.goal->mse < c.lasso->mse / 2.0;
        decreasing = decreasing && c.goal->mse < prev;
        prev = c.goal->mse;
        detail += fmt(" n=%lld GOAL %.3g OAL %.3g LASSO %.3g;", static_cast<long long>(n), c.goal->mse, c.oal->mse,
                      c.lasso->mse);
    }
    report(5, "a", halved && decreasing && t < 900.0,
           fmt("rho=0 MSE(GOAL) < MSE(LASSO)/2 for all n: %s, MSE(GOAL) decreasing: %s, grid %.0f s;",
               halved ? "yes" : "no", decreasing ? "yes" : "no", t) +
               detail);

    detail.clear();
    bool ordered = true, increasing = true;
    prev = -INFINITY;
    for (Index n : {100, 200, 400}) {
        const Cell c = cell(find(rs, n, 0.5));
        if (n != 100) ordered = ordered && c.goal->mse < c.oal->mse && c.oal->mse < c.lasso->mse;
        increasing = increasing && c.oal->mse > prev;
        prev = c.oal->mse;
        detail += fmt(" n=%lld GOAL %.3g OAL %.3g LASSO %.3g;", static_cast<long long>(n), c.goal->mse, c.oal->mse,
                      c.lasso->mse);
    }
    report(5, "b", ordered && increasing && t < 900.0,
           fmt("rho=0.5 GOAL < OAL < LASSO at n=200,400: %s, MSE(OAL) increasing: %s, grid %.0f s;",
               ordered ? "yes" : "no", increasing ? "yes" : "no", t) +
               detail);
}

void selection_pattern(const std::vector<ScenarioResult>& rs) {
    const ScenarioResult& r = find(rs, 400, 0.0);
    const Cell c = cell(r);
    const RoleMap rm = roles(r.scenario);
    double goal_min = 1, oal_min = 1, goal_p = 0, lasso_p = 0;
    int np = 0;
    for (Index j : active_set(r.scenario)) {
        const auto k = static_cast<std::size_t>(j);
        goal_min = std::min(goal_min, c.goal->selection_prop[k]);
        oal_min = std::min(oal_min, c.oal->selection_prop[k]);
        if (rm[k] == Role::OutcomePredictor) {
            goal_p += c.goal->selection_prop[k];
            lasso_p += c.lasso->selection_prop[k];
            ++np;
        }
    }
    goal_p /= np;
    lasso_p /= np;
    const bool ok = goal_min >= 0.9 && oal_min >= 0.9 && lasso_p <= goal_p - 0.3;
    report(6, "", ok,
           fmt("n=400 rho=0: min selection over active set GOAL %.3f OAL %.3f; mean selection of outcome predictors "
               "GOAL %.3f LASSO %.3f",
               goal_min, oal_min, goal_p, lasso_p));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, sep);) parts.push_back(x);
    return parts;
}

void aggregation_identity(const fs::path& metrics, int R) {
    std::ifstream in(metrics);
    int rows = 0;
    double worst = 0.0;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = line == kMetricsHeader;
            continue;
        }
        const auto c = split(line, ',');
        const double bias = std::strtod(c[5].c_str(), nullptr);
        const double se = std::strtod(c[6].c_str(), nullptr);
        const double mse = std::strtod(c[7].c_str(), nullptr);
        const double m = R - std::stoi(c[8]);
        worst = std::max(worst, std::abs(mse - (bias * bias + se * se * (m - 1) / m)));
        ++rows;
    }
    report(7, "", header && rows == 18 && worst <= 1e-10,
           fmt("%d metrics rows, max |mse - (bias^2 + se^2 (R-1)/R)| = %.3g", rows, worst));
}

void determinism(const fs::path& root) {
    const ScenarioFile file = config("comparison_grid.cfg");
    cli::RunConfig cfg;
    cfg.scenarios = {file.scenarios[0], file.scenarios[1]};
    cfg.methods = cli::default_methods(3.0);
    cfg.replications = 20;
    std::ostringstream sink;
    const auto run_into = [&](const std::string& name, int workers) {
        cfg.workers = workers;
        cfg.out = (root / name).string();
        fs::remove_all(cfg.out);
        cli::cmd_simulate(cfg, sink);
    };
    run_into("first", 1);
    run_into("second", 1);
    run_into("parallel", 8);
    int files = 0, differ_rerun = 0, differ_parallel = 0;
    for (const auto& e : fs::directory_iterator(root / "first")) {
        const auto name = e.path().filename();
        const std::string a = slurp(e.path());
        ++files;
        differ_rerun += a != slurp(root / "second" / name);
        differ_parallel += a != slurp(root / "parallel" / name);
    }

    bool same = true;
    for (const auto& s : cfg.scenarios) {
        HarnessOptions serial, threaded;
        threaded.workers = 8;
        const auto a = run_replications(s, cfg.methods, 20, serial);
        const auto b = run_replications(s, cfg.methods, 20, threaded);
        for (std::size_t m = 0; m < a.size(); ++m) {
            same = same && a[m].bias == b[m].bias && a[m].se == b[m].se && a[m].mse == b[m].mse &&
                   a[m].selection_prop == b[m].selection_prop &&
                   a[m].support_recovery_rate == b[m].support_recovery_rate && a[m].n_failed == b[m].n_failed;
        }
    }
    report(8, "", files > 0 && differ_rerun == 0 && differ_parallel == 0 && same,
           fmt("%d output files; differing on rerun: %d, differing with 8 workers: %d; in-memory aggregates equal: %s",
               files, differ_rerun, differ_parallel, same ? "yes" : "no"));
}

} // namespace

int main() {
    const fs::path root = fs::absolute("acceptance_out");
    fs::create_directories(root);
    try {
        solver_correctness();
        mle_reduction();
        selection_consistency();
        asymptotic_normality();

        const ScenarioFile grid = config("comparison_grid.cfg");
        const int R = 200;
        const auto t0 = Clock::now();
        std::vector<ScenarioResult> results;
        for (const auto& s : grid.scenarios)
            results.push_back({s, run_replications(s, cli::default_methods(3.0), R, HarnessOptions{})});
        const auto paths = emit_results(results, root / "comparison_grid", R);
        const double t = seconds_since(t0);
        print_summary(std::cout, results);
        table_trends(results, t);
        selection_pattern(results);
        aggregation_identity(paths.front(), R);

        determinism(root / "determinism");
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

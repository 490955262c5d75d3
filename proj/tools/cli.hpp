#pragma once

// goal simulate | fit | oracle-check | generate
//
// Exit codes: 0 ok, 1 other error, 2 configuration or input error,
// 3 too many failed replications, 4 oracle gate failed.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "goal/data_io.hpp"
#include "goal/report.hpp"

namespace goal::cli {

enum ExitCode : int { kOk = 0, kError = 1, kConfig = 2, kFailures = 3, kGate = 4 };

inline constexpr int kDefaultReplications = 200;
inline constexpr int kDefaultWorkers = 1;
inline constexpr const char* kDefaultOut = "goal_out";

struct Flags {
    std::string input;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> replications;
    std::optional<std::string> out;
    std::optional<std::string> methods;
    std::uint64_t replication = 1;  // generate only
};

/// Values after applying flag > file > default.
struct RunConfig {
    std::vector<Scenario> scenarios;
    std::vector<MethodSpec> methods;
    int replications = kDefaultReplications;
    int workers = kDefaultWorkers;
    std::string out = kDefaultOut;
    double gamma = 3.0;
    bool use_schedule = true;
};

inline std::vector<MethodSpec> default_methods(double gamma) {
    return {{MethodKind::GOAL, gamma}, {MethodKind::OAL, gamma}, {MethodKind::LASSO, gamma}};
}

inline std::vector<MethodSpec> methods_from_flag(const std::string& text, double gamma) {
    return detail::parse_methods(text, gamma, [](const std::string& m) { throw InvalidArgument("--methods: " + m); });
}

inline RunConfig resolve(const ScenarioFile& file, const Flags& f) {
    RunConfig cfg;
    cfg.scenarios = file.scenarios;
    cfg.gamma = file.run.gamma.value_or(3.0);
    cfg.use_schedule = file.run.use_schedule.value_or(true);
    cfg.methods = f.methods ? methods_from_flag(*f.methods, cfg.gamma)
                            : file.run.methods.value_or(default_methods(cfg.gamma));
    cfg.replications = f.replications.value_or(file.run.replications.value_or(kDefaultReplications));
    cfg.workers = f.workers.value_or(file.run.workers.value_or(kDefaultWorkers));
    cfg.out = f.out.value_or(file.run.out.value_or(kDefaultOut));
    if (f.seed) {
        for (auto& s : cfg.scenarios) s.seed = *f.seed;
    }
    if (cfg.workers < 1) throw InvalidArgument("workers must be >= 1");
    return cfg;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.replications < 2) throw InvalidArgument("simulate needs at least 2 replications");
    HarnessOptions opt;
    opt.workers = cfg.workers;
    std::vector<ScenarioResult> results;
    for (const auto& s : cfg.scenarios) results.push_back({s, run_replications(s, cfg.methods, cfg.replications, opt)});
    emit_results(results, cfg.out, cfg.replications);
    print_summary(out, results);
    return kOk;
}

inline int cmd_oracle_check(const RunConfig& cfg, std::ostream& out) {
    if (cfg.replications < 50) throw InvalidArgument("oracle-check needs at least 50 replications");
    OracleOptions opt;
    opt.workers = cfg.workers;
    opt.gamma = cfg.gamma;
    opt.use_schedule = cfg.use_schedule;
    std::vector<OracleResult> results;
    std::vector<OracleDiagnostics> diags;
    for (const auto& s : cfg.scenarios) {
        results.push_back({s, oracle_diagnostics(s, cfg.replications, opt)});
        diags.push_back(results.back().diagnostics);
    }
    emit_oracle(results, cfg.out, cfg.replications);
    print_oracle(out, results);
    const OracleGates g = evaluate_oracle_gates(diags);
    out << "monotone zero recovery: " << (g.monotone ? "pass" : "FAIL") << "\n"
        << "variance ratios in [" << kVarianceRatioLow << ", " << kVarianceRatioHigh
        << "]: " << (g.variance_ok ? "pass" : "FAIL") << "\n";
    return g.passed() ? kOk : kGate;
}

inline int cmd_fit(const std::string& data_path, const Flags& f, std::ostream& out) {
    const Dataset d = read_dataset_csv(data_path);
    const std::vector<MethodSpec> methods = f.methods ? methods_from_flag(*f.methods, 3.0) : default_methods(3.0);
    const std::vector<LambdaPair> grid = lambda_grid(d.n());
    const std::filesystem::path dir = f.out.value_or(kDefaultOut);

    std::ostringstream table;
    table << "# goal " << kVersion << " | iptw " << kIptwVariant << " | data " << data_path << " | checksum "
          << detail::hex64(dataset_checksum(d)) << "\n";
    table << "method,ate,lambda1,lambda2,wamd,selected\n";
    for (const auto& m : methods) {
        const AteEstimate e = fit_method(d, m, grid);
        std::string sel;
        for (Index j : e.selected) sel += (sel.empty() ? "" : " ") + std::to_string(j + 1);
        table << to_string(m.kind) << ',' << detail::format_double(e.ate) << ',' << detail::format_double(e.lambda1)
              << ',' << detail::format_double(e.lambda2) << ',' << detail::format_double(e.wamd) << ',' << sel << "\n";
        out << to_string(m.kind) << ": ate=" << e.ate << " lambda1=" << e.lambda1 << " lambda2=" << e.lambda2
            << " selected={" << sel << "}\n";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": cannot create directory: " + ec.message());
    const auto path = dir / "fit_result.csv";
    auto os = detail::open_output(path);
    os << table.str();
    detail::finish_output(os, path);
    return kOk;
}

inline int cmd_generate(const ScenarioFile& file, const Flags& f, std::ostream& out) {
    Scenario s = file.scenarios.front();
    if (f.seed) s.seed = *f.seed;
    const Dataset d = generate_dataset(s, f.replication);
    const std::string path = f.out.value_or("dataset.csv");
    write_dataset_csv(path, d);
    out << "wrote " << path << " (n=" << d.n() << ", p=" << d.p() << ")\n";
    return kOk;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"GOAL propensity-score estimation and Monte Carlo harness", "goal"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", f.seed, "override every scenario's seed");
        sub->add_option("--workers", f.workers, "worker threads");
        sub->add_option("--replications", f.replications, "Monte Carlo replications");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--methods", f.methods, "comma-separated subset of GOAL,OAL,LASSO");
    };
    auto* sim = app.add_subcommand("simulate", "run replications for every scenario in a scenario file");
    sim->add_option("scenario", f.input, "scenario file")->required();
    add_common(sim);
    auto* fit_cmd = app.add_subcommand("fit", "estimate the ATE on a CSV dataset (Y,A,X1..Xp)");
    fit_cmd->add_option("data", f.input, "dataset file")->required();
    fit_cmd->add_option("--out", f.out, "output directory");
    fit_cmd->add_option("--methods", f.methods, "comma-separated subset of GOAL,OAL,LASSO");
    auto* oracle = app.add_subcommand("oracle-check", "selection and normality diagnostics along n");
    oracle->add_option("scenario", f.input, "scenario file")->required();
    add_common(oracle);
    auto* gen = app.add_subcommand("generate", "write one replication of the first scenario as CSV");
    gen->add_option("scenario", f.input, "scenario file")->required();
    gen->add_option("--seed", f.seed, "override the scenario seed");
    gen->add_option("--replication", f.replication, "replication index (default 1)");
    gen->add_option("--out", f.out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "goal: " << e.what() << "\n";
        return kConfig;
    }

    try {
        if (*fit_cmd) return cmd_fit(f.input, f, out);
        const ScenarioFile file = load_scenario_file(f.input);
        if (*gen) return cmd_generate(file, f, out);
        const RunConfig cfg = resolve(file, f);
        if (*sim) return cmd_simulate(cfg, out);
        return cmd_oracle_check(cfg, out);
    } catch (const ParseError& e) {
        err << "goal: " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidArgument& e) {
        err << "goal: " << e.what() << "\n";
        return kConfig;
    } catch (const InvalidScenario& e) {
        err << "goal: " << e.what() << "\n";
        return kConfig;
    } catch (const TooManyFailures& e) {
        err << "goal: " << e.what() << "\n";
        return kFailures;
    } catch (const std::exception& e) {
        err << "goal: " << e.what() << "\n";
        return kError;
    }
}

} // namespace goal::cli

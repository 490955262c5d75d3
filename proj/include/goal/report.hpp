#pragma once

// Output files for simulation and oracle runs. Every file starts with '#'
// comment lines naming the library version, RNG, IPTW variant and the
// scenario hash and seed, followed by a plain CSV (or SVG) body. Numbers are
// printed with 17 significant digits so reruns are byte-identical and the
// aggregates can be re-checked exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "goal/harness.hpp"
#include "goal/scenario_config.hpp"
#include "goal/version.hpp"

namespace goal {

struct ScenarioResult {
    Scenario scenario;
    std::vector<ReplicationSummary> summaries;
};

namespace detail {

inline std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string short_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string provenance_line(int replications) {
    std::ostringstream os;
    os << "# goal " << kVersion << " | rng " << kRngAlgorithm << " | iptw " << kIptwVariant
       << " | replications " << replications;
    return os.str();
}

inline std::string scenario_line(std::size_t k, const Scenario& s) {
    std::ostringstream os;
    os << "# scenario " << (k + 1) << " | hash " << hex64(scenario_hash(s)) << " | seed " << s.seed << " | n " << s.n
       << " | p " << s.p << " | rho " << format_double(s.rho);
    return os.str();
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(path.string() + ": cannot open for writing");
    return os;
}

inline void finish_output(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw Error(path.string() + ": write failed");
}

inline std::string_view marker_color(Role r) {
    switch (r) {
        case Role::Confounder: return "#1b6ca8";
        case Role::OutcomePredictor: return "#2a9d3f";
        case Role::TreatmentPredictor: return "#d1495b";
        case Role::Spurious: return "#8c8c8c";
    }
    return "#000000";
}

} // namespace detail

/// File-name stem for scenario k (0-based): s01_n100_rho0.5
inline std::string scenario_tag(std::size_t k, const Scenario& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%02zu", k + 1);
    return std::string(buf) + "_n" + std::to_string(s.n) + "_rho" + detail::short_double(s.rho);
}

inline constexpr std::string_view kMetricsHeader = "n,p,card_A,rho,method,bias,se,mse,n_failed";
inline constexpr std::string_view kSelectionHeader = "method,covariate_index,role,proportion";

inline void write_metrics(std::ostream& os, const std::vector<ScenarioResult>& results, int replications) {
    os << detail::provenance_line(replications) << "\n";
    for (std::size_t k = 0; k < results.size(); ++k) os << detail::scenario_line(k, results[k].scenario) << "\n";
    os << kMetricsHeader << "\n";
    for (const auto& res : results) {
        const Scenario& s = res.scenario;
        const auto card_a = active_set(s).size();
        for (const auto& sum : res.summaries) {
            os << s.n << ',' << s.p << ',' << card_a << ',' << detail::format_double(s.rho) << ','
               << to_string(sum.method.kind) << ',' << detail::format_double(sum.bias) << ','
               << detail::format_double(sum.se) << ',' << detail::format_double(sum.mse) << ',' << sum.n_failed
               << "\n";
        }
    }
}

inline void write_selection(std::ostream& os, std::size_t k, const ScenarioResult& res, int replications) {
    os << detail::provenance_line(replications) << "\n" << detail::scenario_line(k, res.scenario) << "\n";
    os << kSelectionHeader << "\n";
    const RoleMap rm = roles(res.scenario);
    for (const auto& sum : res.summaries) {
        for (std::size_t j = 0; j < sum.selection_prop.size(); ++j) {
            os << to_string(sum.method.kind) << ',' << (j + 1) << ',' << to_string(rm[j]) << ','
               << detail::format_double(sum.selection_prop[j]) << "\n";
        }
    }
}

/// Selection proportion against covariate index; marker colour is the role,
/// marker shape the method.
inline void write_selection_svg(std::ostream& os, std::size_t k, const ScenarioResult& res, int replications) {
    const Scenario& s = res.scenario;
    const RoleMap rm = roles(s);
    const double width = 720, height = 360, left = 60, right = 150, top = 40, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    const auto p = static_cast<double>(s.p);
    auto x_of = [&](double j) { return left + (p > 1 ? (j - 1) / (p - 1) : 0.5) * plot_w; };
    auto y_of = [&](double v) { return top + (1.0 - v) * plot_h; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<!--" << detail::provenance_line(replications).substr(1) << " -->\n";
    os << "<!--" << detail::scenario_line(k, s).substr(1) << " -->\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left << "\" y=\"22\" font-size=\"13\">Selection proportion, n = " << s.n
       << ", p = " << s.p << ", rho = " << detail::short_double(s.rho) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y_of(0) << "\" x2=\"" << left + plot_w << "\" y2=\"" << y_of(0)
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y_of(0) << "\" x2=\"" << left << "\" y2=\"" << y_of(1)
       << "\" stroke=\"black\"/>\n";
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        os << "<line x1=\"" << left - 4 << "\" y1=\"" << num(y_of(t)) << "\" x2=\"" << left + plot_w << "\" y2=\""
           << num(y_of(t)) << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << left - 8 << "\" y=\"" << num(y_of(t) + 4) << "\" text-anchor=\"end\">" << t
           << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\">covariate index</text>\n";

    const std::size_t methods = res.summaries.size();
    for (std::size_t m = 0; m < methods; ++m) {
        const auto& sum = res.summaries[m];
        const double offset = (static_cast<double>(m) - (static_cast<double>(methods) - 1) / 2.0) * 2.5;
        for (std::size_t j = 0; j < sum.selection_prop.size(); ++j) {
            const double cx = x_of(static_cast<double>(j + 1)) + offset;
            const double cy = y_of(sum.selection_prop[j]);
            const auto color = detail::marker_color(rm[j]);
            switch (m % 3) {
                case 0:
                    os << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"3\" fill=\"" << color
                       << "\"/>\n";
                    break;
                case 1:
                    os << "<rect x=\"" << num(cx - 2.5) << "\" y=\"" << num(cy - 2.5)
                       << "\" width=\"5\" height=\"5\" fill=\"none\" stroke=\"" << color << "\"/>\n";
                    break;
                default:
                    os << "<path d=\"M" << num(cx) << ' ' << num(cy - 3) << " L" << num(cx + 3) << ' '
                       << num(cy + 3) << " L" << num(cx - 3) << ' ' << num(cy + 3) << " Z\" fill=\"none\" stroke=\""
                       << color << "\"/>\n";
                    break;
            }
        }
    }

    double ly = top + 10;
    const double lx = left + plot_w + 20;
    for (Role r : {Role::Confounder, Role::OutcomePredictor, Role::TreatmentPredictor, Role::Spurious}) {
        os << "<circle cx=\"" << lx << "\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << detail::marker_color(r)
           << "\"/><text x=\"" << lx + 10 << "\" y=\"" << ly << "\">" << to_string(r) << "</text>\n";
        ly += 18;
    }
    ly += 10;
    const char* shapes[] = {"circle", "square", "triangle"};
    for (std::size_t m = 0; m < methods; ++m) {
        os << "<text x=\"" << lx << "\" y=\"" << ly << "\">" << to_string(res.summaries[m].method.kind) << ": "
           << shapes[m % 3] << "</text>\n";
        ly += 18;
    }
    os << "</svg>\n";
}

/// Writes metrics.csv plus selection_<tag>.csv and selection_<tag>.svg per
/// scenario into `dir` (created if missing). Returns the paths written.
inline std::vector<std::filesystem::path> emit_results(const std::vector<ScenarioResult>& results,
                                                       const std::filesystem::path& dir, int replications) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": cannot create directory: " + ec.message());

    std::vector<std::filesystem::path> written;
    const auto metrics_path = dir / "metrics.csv";
    {
        auto os = detail::open_output(metrics_path);
        write_metrics(os, results, replications);
        detail::finish_output(os, metrics_path);
    }
    written.push_back(metrics_path);
    for (std::size_t k = 0; k < results.size(); ++k) {
        const std::string tag = scenario_tag(k, results[k].scenario);
        const auto csv = dir / ("selection_" + tag + ".csv");
        {
            auto os = detail::open_output(csv);
            write_selection(os, k, results[k], replications);
            detail::finish_output(os, csv);
        }
        const auto svg = dir / ("selection_" + tag + ".svg");
        {
            auto os = detail::open_output(svg);
            write_selection_svg(os, k, results[k], replications);
            detail::finish_output(os, svg);
        }
        written.push_back(csv);
        written.push_back(svg);
    }
    return written;
}

inline void print_summary(std::ostream& os, const std::vector<ScenarioResult>& results) {
    os << std::left << std::setw(6) << "n" << std::setw(5) << "p" << std::setw(7) << "|A|" << std::setw(6) << "rho"
       << std::setw(7) << "method" << std::right << std::setw(11) << "bias" << std::setw(11) << "se"
       << std::setw(11) << "mse" << std::setw(8) << "failed" << "\n";
    for (const auto& res : results) {
        const Scenario& s = res.scenario;
        for (const auto& sum : res.summaries) {
            os << std::left << std::setw(6) << s.n << std::setw(5) << s.p << std::setw(7) << active_set(s).size()
               << std::setw(6) << detail::short_double(s.rho) << std::setw(7) << to_string(sum.method.kind)
               << std::right << std::fixed << std::setprecision(4) << std::setw(11) << sum.bias << std::setw(11)
               << sum.se << std::setw(11) << sum.mse << std::setw(8) << sum.n_failed << "\n";
            os.unsetf(std::ios::floatfield);
        }
    }
}

// ---- oracle diagnostics ----

struct OracleResult {
    Scenario scenario;
    OracleDiagnostics diagnostics;
};

struct OracleGates {
    bool monotone = true;        // zero recovery nondecreasing in n, slack 0.05
    bool variance_ok = true;     // ratios in [0.7, 1.3] at the largest n
    bool passed() const { return monotone && variance_ok; }
};

inline constexpr double kMonotoneSlack = 0.05;
inline constexpr double kVarianceRatioLow = 0.7;
inline constexpr double kVarianceRatioHigh = 1.3;

/// Results are compared in increasing n. With one n the monotonicity gate is vacuous.
inline OracleGates evaluate_oracle_gates(std::vector<OracleDiagnostics> diags) {
    OracleGates g;
    if (diags.empty()) return g;
    std::stable_sort(diags.begin(), diags.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
    for (std::size_t k = 1; k < diags.size(); ++k) {
        if (diags[k].zero_recovery_rate < diags[k - 1].zero_recovery_rate - kMonotoneSlack) g.monotone = false;
    }
    for (const auto& cm : diags.back().standardized_moments) {
        const double r = cm.variance_ratio();
        if (!(r >= kVarianceRatioLow && r <= kVarianceRatioHigh)) g.variance_ok = false;
    }
    return g;
}

inline void write_oracle(std::ostream& os, const std::vector<OracleResult>& results, int replications) {
    os << detail::provenance_line(replications) << "\n";
    for (std::size_t k = 0; k < results.size(); ++k) os << detail::scenario_line(k, results[k].scenario) << "\n";
    os << "n,p,card_A,rho,zero_recovery_rate,nonzero_recovery_rate,n_failed\n";
    for (const auto& r : results) {
        const auto& d = r.diagnostics;
        os << r.scenario.n << ',' << r.scenario.p << ',' << active_set(r.scenario).size() << ','
           << detail::format_double(r.scenario.rho) << ',' << detail::format_double(d.zero_recovery_rate) << ','
           << detail::format_double(d.nonzero_recovery_rate) << ',' << d.n_failed << "\n";
    }
}

inline void write_oracle_moments(std::ostream& os, const std::vector<OracleResult>& results, int replications) {
    os << detail::provenance_line(replications) << "\n";
    for (std::size_t k = 0; k < results.size(); ++k) os << detail::scenario_line(k, results[k].scenario) << "\n";
    os << "n,covariate_index,role,mean,mean_se,variance,reference_variance,variance_ratio\n";
    for (const auto& r : results) {
        const RoleMap rm = roles(r.scenario);
        for (const auto& cm : r.diagnostics.standardized_moments) {
            os << r.scenario.n << ',' << (cm.index + 1) << ',' << to_string(rm[static_cast<std::size_t>(cm.index)])
               << ',' << detail::format_double(cm.mean) << ',' << detail::format_double(cm.mean_se) << ','
               << detail::format_double(cm.variance) << ',' << detail::format_double(cm.reference_variance) << ','
               << detail::format_double(cm.variance_ratio()) << "\n";
        }
    }
}

inline std::vector<std::filesystem::path> emit_oracle(const std::vector<OracleResult>& results,
                                                      const std::filesystem::path& dir, int replications) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(dir.string() + ": cannot create directory: " + ec.message());
    const auto summary = dir / "oracle.csv";
    const auto moments = dir / "oracle_moments.csv";
    {
        auto os = detail::open_output(summary);
        write_oracle(os, results, replications);
        detail::finish_output(os, summary);
    }
    {
        auto os = detail::open_output(moments);
        write_oracle_moments(os, results, replications);
        detail::finish_output(os, moments);
    }
    return {summary, moments};
}

inline void print_oracle(std::ostream& os, const std::vector<OracleResult>& results) {
    for (const auto& r : results) {
        const auto& d = r.diagnostics;
        double lo = 0.0, hi = 0.0;
        for (std::size_t k = 0; k < d.standardized_moments.size(); ++k) {
            const double v = d.standardized_moments[k].variance_ratio();
            lo = k == 0 ? v : std::min(lo, v);
            hi = k == 0 ? v : std::max(hi, v);
        }
        os << "n=" << r.scenario.n << " p=" << r.scenario.p << std::fixed << std::setprecision(3)
           << " zero_recovery=" << d.zero_recovery_rate << " nonzero_recovery=" << d.nonzero_recovery_rate
           << " variance_ratio=[" << lo << ", " << hi << "] failed=" << d.n_failed << "\n";
        os.unsetf(std::ios::floatfield);
    }
}

} // namespace goal

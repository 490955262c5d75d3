#pragma once

// Scenario files: line-oriented blocks of `key = value` pairs.
//
//   # comment
//   run {
//     methods = GOAL, OAL, LASSO
//     replications = 200
//   }
//   grid {                  # one default scenario per (n, rho) pair
//     n = 100, 200, 400
//     rho = 0, 0.5
//     seed = 20240101
//   }
//   scenario {
//     n = 100
//     rho = 0
//     q = 3
//     p = 35
//     alpha_star = 0.6*3, 0*3, 0.1*3, 0*26   # value*count repeats a value
//     beta_star = 0.6*6, 0*29
//     beta_A = 0
//     seed = 1
//   }
//
// Unknown blocks or keys, duplicate keys and malformed values are errors
// reported with the offending line number.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "goal/estimators.hpp"
#include "goal/simgen.hpp"

namespace goal {

struct RunSection {
    std::optional<std::vector<MethodSpec>> methods;
    std::optional<int> replications;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<double> gamma;
    std::optional<bool> use_schedule;
};

struct ScenarioFile {
    RunSection run;
    std::vector<Scenario> scenarios;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T value{};
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
    return value;
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Block {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

class BlockReader {
public:
    BlockReader(const Block& b, std::string source) : block_(b), source_(std::move(source)) {}

    [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ParseError(source_, line, what); }

    bool has(const std::string& key) const { return block_.entries.count(key) != 0; }

    const Entry& entry(const std::string& key) const {
        const auto it = block_.entries.find(key);
        if (it == block_.entries.end()) fail(block_.line, "block '" + block_.name + "' is missing key '" + key + "'");
        return it->second;
    }

    template <class T>
    T scalar(const std::string& key) const {
        const Entry& e = entry(key);
        const auto v = parse_number<T>(e.value);
        if (!v) fail(e.line, "key '" + key + "': cannot parse '" + e.value + "' as a number");
        return *v;
    }

    template <class T>
    std::vector<T> list(const std::string& key) const {
        const Entry& e = entry(key);
        std::vector<T> out;
        for (std::string_view tok : split(e.value, ',')) {
            if (tok.empty()) fail(e.line, "key '" + key + "': empty list element");
            const auto star = tok.find('*');
            std::size_t count = 1;
            std::string_view num = tok;
            if (star != std::string_view::npos) {
                num = trim(tok.substr(0, star));
                const auto c = parse_number<std::size_t>(tok.substr(star + 1));
                if (!c || *c == 0) fail(e.line, "key '" + key + "': bad repeat count in '" + std::string(tok) + "'");
                count = *c;
            }
            const auto v = parse_number<T>(num);
            if (!v) fail(e.line, "key '" + key + "': cannot parse '" + std::string(num) + "'");
            out.insert(out.end(), count, *v);
        }
        return out;
    }

    std::string text(const std::string& key) const { return entry(key).value; }

    void reject_unknown(const std::vector<std::string>& allowed) const {
        for (const auto& [key, e] : block_.entries) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
                fail(e.line, "unknown key '" + key + "' in block '" + block_.name + "'");
        }
    }

    std::size_t line_of(const std::string& key) const { return block_.entries.at(key).line; }
    std::size_t line() const { return block_.line; }

private:
    const Block& block_;
    std::string source_;
};

inline std::vector<Block> read_blocks(std::istream& in, const std::string& source) {
    std::vector<Block> blocks;
    std::optional<Block> open;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (!open) {
            if (line.back() != '{') throw ParseError(source, lineno, "expected 'name {' to open a block");
            const std::string name(trim(line.substr(0, line.size() - 1)));
            if (name.empty()) throw ParseError(source, lineno, "block name missing before '{'");
            open = Block{name, lineno, {}};
            continue;
        }
        if (line == "}") {
            blocks.push_back(std::move(*open));
            open.reset();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            if (line.back() == '{') throw ParseError(source, lineno, "blocks cannot be nested inside '" + open->name + "'");
            throw ParseError(source, lineno, "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ParseError(source, lineno, "missing key before '='");
        if (value.empty()) throw ParseError(source, lineno, "missing value for key '" + key + "'");
        if (open->entries.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
        open->entries.emplace(key, Entry{value, lineno});
    }
    if (open) throw ParseError(source, open->line, "block '" + open->name + "' is not closed");
    return blocks;
}

inline std::vector<MethodSpec> parse_methods(std::string_view text, double gamma, const std::function<void(const std::string&)>& fail) {
    std::vector<MethodSpec> out;
    for (std::string_view tok : split(text, ',')) {
        const auto kind = parse_method(tok);
        if (!kind) fail("unknown method '" + std::string(tok) + "' (expected GOAL, OAL or LASSO)");
        out.push_back({*kind, gamma});
    }
    return out;
}

inline Scenario scenario_from_block(const BlockReader& r) {
    r.reject_unknown({"n", "rho", "q", "p", "alpha_star", "beta_star", "beta_A", "seed"});
    Scenario s;
    s.n = r.scalar<Index>("n");
    s.rho = r.scalar<double>("rho");
    s.seed = r.scalar<std::uint64_t>("seed");
    s.beta_A = r.has("beta_A") ? r.scalar<double>("beta_A") : 0.0;

    const bool has_alpha = r.has("alpha_star");
    const bool has_beta = r.has("beta_star");
    if (has_alpha != has_beta) r.fail(r.line(), "alpha_star and beta_star must be given together");

    std::vector<double> alpha, beta;
    if (has_alpha) {
        alpha = r.list<double>("alpha_star");
        beta = r.list<double>("beta_star");
    }
    if (r.has("p")) {
        s.p = r.scalar<Index>("p");
    } else if (has_alpha) {
        s.p = static_cast<Index>(alpha.size());
    } else {
        s.p = static_cast<Index>(std::floor(4.0 * std::sqrt(static_cast<double>(s.n)) - 5.0));
    }
    s.q = r.has("q") ? r.scalar<Index>("q") : s.p / 9;

    try {
        if (has_alpha) {
            s.alpha_star = Eigen::Map<const Vector>(alpha.data(), static_cast<Index>(alpha.size()));
            s.beta_star = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
        } else {
            if (s.p < 3 * s.q || s.q < 1) throw InvalidScenario("scenario needs q >= 1 and p >= 3q");
            fill_blocks(s);
        }
        validate(s);
    } catch (const InvalidScenario& e) {
        r.fail(r.line(), e.what());
    }
    return s;
}

} // namespace detail

inline ScenarioFile parse_scenario_file(std::istream& in, const std::string& source = "<input>") {
    ScenarioFile out;
    bool saw_run = false;
    for (const auto& block : detail::read_blocks(in, source)) {
        detail::BlockReader r(block, source);
        if (block.name == "run") {
            if (saw_run) r.fail(block.line, "only one 'run' block is allowed");
            saw_run = true;
            r.reject_unknown({"methods", "replications", "workers", "out", "gamma", "use_schedule"});
            if (r.has("gamma")) {
                out.run.gamma = r.scalar<double>("gamma");
                if (!(*out.run.gamma > 1.0)) r.fail(r.line_of("gamma"), "gamma must be > 1");
            }
            if (r.has("methods")) {
                const auto line = r.line_of("methods");
                out.run.methods = detail::parse_methods(r.text("methods"), out.run.gamma.value_or(3.0),
                                                        [&](const std::string& m) { r.fail(line, m); });
            }
            if (r.has("replications")) out.run.replications = r.scalar<int>("replications");
            if (r.has("workers")) {
                out.run.workers = r.scalar<int>("workers");
                if (*out.run.workers < 1) r.fail(r.line_of("workers"), "workers must be >= 1");
            }
            if (r.has("out")) out.run.out = r.text("out");
            if (r.has("use_schedule")) {
                const std::string v = r.text("use_schedule");
                if (v != "true" && v != "false") r.fail(r.line_of("use_schedule"), "use_schedule must be true or false");
                out.run.use_schedule = v == "true";
            }
        } else if (block.name == "grid") {
            r.reject_unknown({"n", "rho", "seed"});
            const auto ns = r.list<Index>("n");
            const auto rhos = r.list<double>("rho");
            const auto seed = r.scalar<std::uint64_t>("seed");
            for (Index n : ns) {
                for (double rho : rhos) {
                    try {
                        out.scenarios.push_back(paper_scenario(n, rho, seed));
                    } catch (const InvalidScenario& e) {
                        r.fail(block.line, e.what());
                    }
                }
            }
        } else if (block.name == "scenario") {
            out.scenarios.push_back(detail::scenario_from_block(r));
        } else {
            r.fail(block.line, "unknown block '" + block.name + "' (expected run, grid or scenario)");
        }
    }
    if (out.scenarios.empty()) throw ParseError(source, 0, "file defines no scenarios");
    return out;
}

inline ScenarioFile load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return parse_scenario_file(in, path);
}

namespace detail {

inline std::string run_length(const Vector& v) {
    std::string out;
    Index i = 0;
    while (i < v.size()) {
        Index k = i + 1;
        while (k < v.size() && v[k] == v[i]) ++k;
        if (!out.empty()) out += ", ";
        out += format_double(v[i]);
        if (k - i > 1) out += "*" + std::to_string(k - i);
        i = k;
    }
    return out;
}

} // namespace detail

/// Text form of one scenario that parse_scenario_file reads back exactly.
inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "scenario {\n"
       << "  n = " << s.n << "\n"
       << "  rho = " << detail::format_double(s.rho) << "\n"
       << "  q = " << s.q << "\n"
       << "  p = " << s.p << "\n"
       << "  alpha_star = " << detail::run_length(s.alpha_star) << "\n"
       << "  beta_star = " << detail::run_length(s.beta_star) << "\n"
       << "  beta_A = " << detail::format_double(s.beta_A) << "\n"
       << "  seed = " << s.seed << "\n"
       << "}\n";
    return os.str();
}

} // namespace goal

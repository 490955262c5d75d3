#pragma once

// Comma-separated dataset files with a mandatory header: Y,A,X1,...,Xp.
// Values are written with 17 significant digits so a write/read round trip
// reproduces every double exactly.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "goal/scenario_config.hpp"

namespace goal {

inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
    os << "Y,A";
    for (Index j = 0; j < d.p(); ++j) os << ",X" << (j + 1);
    os << "\n";
    for (Index i = 0; i < d.n(); ++i) {
        os << detail::format_double(d.Y[i]) << ',' << (d.A[i] == 1.0 ? '1' : '0');
        for (Index j = 0; j < d.p(); ++j) os << ',' << detail::format_double(d.X(i, j));
        os << "\n";
    }
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream os(path);
    if (!os) throw Error(path + ": cannot open for writing");
    write_dataset_csv(os, d);
    if (!os) throw Error(path + ": write failed");
}

inline Dataset read_dataset_csv(std::istream& in, const std::string& source = "<input>") {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(source, 1, "empty file; expected header Y,A,X1,...,Xp");
    ++lineno;

    const auto header = detail::split(detail::trim(line), ',');
    if (header.size() < 2 || header[0] != "Y" || header[1] != "A")
        throw ParseError(source, lineno, "header must start with Y,A");
    const auto p = static_cast<Index>(header.size()) - 2;
    if (p < 1) throw ParseError(source, lineno, "no covariate columns (expected X1,...,Xp after Y,A)");
    for (Index j = 0; j < p; ++j) {
        const std::string expected = "X" + std::to_string(j + 1);
        if (header[static_cast<std::size_t>(j) + 2] != expected)
            throw ParseError(source, lineno, "column " + std::to_string(j + 3) + " must be named " + expected);
    }

    std::vector<double> y, a, x;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(detail::trim(line), ',');
        if (static_cast<Index>(cells.size()) != p + 2)
            throw ParseError(source, lineno, "expected " + std::to_string(p + 2) + " cells, found " +
                                                 std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = detail::parse_number<double>(cells[c]);
            if (!v || !std::isfinite(*v))
                throw ParseError(source, lineno, "cell " + std::to_string(c + 1) + " ('" + std::string(cells[c]) +
                                                     "') is not a finite number");
            row[c] = *v;
        }
        if (row[1] != 0.0 && row[1] != 1.0) throw ParseError(source, lineno, "treatment A must be 0 or 1");
        y.push_back(row[0]);
        a.push_back(row[1]);
        x.insert(x.end(), row.begin() + 2, row.end());
    }
    if (y.empty()) throw ParseError(source, lineno, "no data rows");

    const auto n = static_cast<Index>(y.size());
    Dataset d;
    d.Y = Eigen::Map<const Vector>(y.data(), n);
    d.A = Eigen::Map<const Vector>(a.data(), n);
    d.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(x.data(), n, p);
    validate(d);
    return d;
}

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    return read_dataset_csv(in, path);
}

} // namespace goal

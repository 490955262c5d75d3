#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace goal {

// All library errors derive from goal::Error so callers can catch the family
// without swallowing unrelated std exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidGamma : public InvalidArgument {
public:
    explicit InvalidGamma(double gamma)
        : InvalidArgument("gamma must be > 1, got " + std::to_string(gamma)) {}
};

class NonFiniteObjective : public Error {
public:
    using Error::Error;
};

class DegenerateDesign : public Error {
public:
    using Error::Error;
};

class DegenerateArm : public Error {
public:
    using Error::Error;
};

class NonFiniteWeight : public Error {
public:
    using Error::Error;
};

class NoConvergedCandidate : public Error {
public:
    using Error::Error;
};

class InvalidScenario : public Error {
public:
    using Error::Error;
};

class TooManyFailures : public Error {
public:
    using Error::Error;
};

// Malformed scenario/config or data file. line is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(format(source, line, what)), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& source, std::size_t line, const std::string& what) {
        std::string out = source;
        if (line > 0) out += ":" + std::to_string(line);
        return out + ": " + what;
    }

    std::size_t line_;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
    if (!ok) throw DimensionMismatch(what);
}

} // namespace detail
} // namespace goal

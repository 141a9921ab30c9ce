#pragma once

#include <stdexcept>
#include <string>

namespace stabledom {

/// Argument outside the mathematical domain of an operation (negative radius, lag <= 2, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature ran out of budget; carries the two most recent estimates.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double last, double previous)
        : std::runtime_error(what), last_estimate(last), previous_estimate(previous) {}

    double last_estimate;
    double previous_estimate;
};

/// The lattice box loses more mass through its boundary than allowed.
class BoxTooSmallError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A per-level mass certificate of the iterated kernels was violated.
class MassCertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two inputs that must describe the same experiment do not.
class ConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid config file; `line` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line_no)
        : std::runtime_error(what), line(line_no) {}

    int line;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace stabledom

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dopplerline {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, configuration or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A current reached the critical current of the line.
class CriticalCurrentExceeded : public Error {
public:
    CriticalCurrentExceeded(double current, double i_crit, std::string where = {});
    /// Full message, used when adding context to an existing error.
    CriticalCurrentExceeded(const std::string& message, double current, double i_crit);

    double current() const noexcept { return current_; }
    double i_crit() const noexcept { return i_crit_; }

private:
    double current_;
    double i_crit_;
};

/// Front velocity equals the transmitted phase velocity.
class SingularInterface : public Error {
public:
    using Error::Error;
};

class CflViolation : public Error {
public:
    using Error::Error;
};

/// The field went non-finite during time stepping.
class NonFiniteField : public Error {
public:
    NonFiniteField(std::int64_t step, double time);
    NonFiniteField(const std::string& message, std::int64_t step);

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

/// No sample passes the magnitude gate.
class EmptyGate : public Error {
public:
    using Error::Error;
};

class InsufficientSupport : public Error {
public:
    using Error::Error;
};

class FitDiverged : public Error {
public:
    using Error::Error;
};

/// Amplitude-sweep fit produced a non-negative quadratic coefficient.
class SignError : public Error {
public:
    using Error::Error;
};

class AlignmentFailed : public Error {
public:
    using Error::Error;
};

/// Characteristic-oracle query outside the model's domain.
class OracleError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Rethrows the exception being handled with "context: " prefixed to its message, keeping its type.
/// Only valid inside a catch block.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace dopplerline

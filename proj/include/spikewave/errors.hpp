#pragma once

#include <stdexcept>
#include <string>

namespace spikewave {

// Exit-code classes used by the CLI: numerical failures map to 2,
// validation failures to 3 and configuration problems to 4.
enum class ErrorClass { numerical = 2, validation = 3, config = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorClass::numerical, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorClass::validation, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::config, what) {}
};

// Argument outside the domain where a formula is defined (strip of
// convergence, psi support, ...).
class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Firing offsets lost their ordering or the speed left (0, inf).
class OrderViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientEvents : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegrationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Tangency offset T_G not beyond the last spike.
class TangencyOrderViolation : public OrderViolation {
public:
    using OrderViolation::OrderViolation;
};

// Hopf frequency collapsed onto the trivial root.
class ZeroFrequencyCollapse : public NoConvergence {
public:
    using NoConvergence::NoConvergence;
};

}  // namespace spikewave

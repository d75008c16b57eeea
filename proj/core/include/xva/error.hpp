#pragma once

#include <stdexcept>
#include <string>

namespace xva {

/// Base of every error thrown by the library. Carries the name of the module
/// that raised it so front ends can report where a failure originated.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message);

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// A parameter violates its documented invariants.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// The time step is too large for the implicit risky update to be well posed.
class StabilityViolation : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function (e.g. Phi^-1(0)).
class DomainError : public Error {
public:
    using Error::Error;
};

class SingularKernel : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

} // namespace xva

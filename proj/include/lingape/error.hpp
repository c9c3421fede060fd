#pragma once

#include <stdexcept>
#include <string>

namespace lingape {

// Caller passed something that violates an operation's preconditions
// (dimension mismatch, non-finite value, out-of-range index, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An instance, table or batch could not be built from otherwise valid input.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A direction that cannot be written as a combination of the arm features.
class InfeasibleDirection : public std::runtime_error {
public:
    InfeasibleDirection(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace lingape

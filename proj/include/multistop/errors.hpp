#pragma once

#include <stdexcept>
#include <string>

namespace multistop {

// Invalid input: malformed tree/operator/payoff specs, violated preconditions.
class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Enumeration / recursion budget exceeded. Never truncate silently.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A certified numerical violation (e.g. plug-in optimality assertion failed,
// which signals an operator breaking a required axiom). Carries diagnostics.
class ViolationError : public std::runtime_error {
public:
    explicit ViolationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace multistop

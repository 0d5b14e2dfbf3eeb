#pragma once

#include <stdexcept>
#include <string>

namespace fdrreg {

// Invalid argument values (probabilities outside [0,1], negative densities, bad configs).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Data that cannot support the requested estimate (constant z, empty bins, ...).
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Iterative procedure failed to converge or diverged.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fitted model has a shape that violates the method's assumptions.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fdrreg

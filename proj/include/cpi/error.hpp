#pragma once

#include <stdexcept>
#include <string>

namespace cpi {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input or a precondition violated by caller-supplied data.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An exact solver was asked to work beyond its size guard or memory budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// The simulated signal chain cannot honour the request (grid, bandwidth).
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace cpi

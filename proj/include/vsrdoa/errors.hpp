#pragma once

#include <stdexcept>
#include <string>

namespace vsrdoa {

/// Malformed or out-of-contract input (bad dimensions, non-finite values,
/// invalid configuration fields).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A linear system could not be solved even after regularization.
class SingularMatrix : public std::runtime_error {
public:
    explicit SingularMatrix(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative method produced non-finite iterates.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vsrdoa

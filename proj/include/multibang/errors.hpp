#pragma once

#include <stdexcept>
#include <string>

namespace multibang {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the set it is required to belong to (e.g. v outside [u_1, u_d]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bregman distance requested with q not in the subdifferential at the base point.
class InvalidSubgradient : public Error {
public:
    using Error::Error;
};

/// Fields defined on different grids were combined.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An iterative or direct linear solve did not reach its tolerance.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double achieved_residual)
        : Error(what), achieved_residual_(achieved_residual) {}

    double achieved_residual() const noexcept { return achieved_residual_; }

private:
    double achieved_residual_;
};

}  // namespace multibang

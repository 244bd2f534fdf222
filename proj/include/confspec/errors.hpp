#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace confspec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: non-manifold mesh, bad density, unknown name, ...
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Requested size exceeds a configured cap.
class ResourceLimitError : public Error {
public:
    using Error::Error;
};

/// Input is valid in principle but too close to degenerate to compute with.
class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its iteration cap; carries the best residuals reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// Eigenvalue requested for a simple-eigenvalue routine belongs to a cluster.
class MultiplicityError : public Error {
public:
    MultiplicityError(const std::string& what, int cluster_size)
        : Error(what), cluster_size_(cluster_size) {}
    int cluster_size() const noexcept { return cluster_size_; }

private:
    int cluster_size_;
};

/// Surgery parameter outside its geometric guard (radius too large, overlap, ...).
class GuardError : public Error {
public:
    using Error::Error;
};

/// Surgery inputs were not prepared as required (non-flat cap, mismatched rings, missing labels).
class PreparationError : public Error {
public:
    using Error::Error;
};

}  // namespace confspec

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mlsm {

// Base of every library error. category() is a stable machine-readable tag
// that the command-line tool reports alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string_view category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

// Real argument outside the domain of an MGF/CGF (or a parameter invariant).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// A complex square-root radicand entered the left half plane, i.e. a contour
// could cross the principal branch cut.
class BranchError : public Error {
public:
    explicit BranchError(const std::string& what) : Error("numerical_domain", what) {}
};

class GridCoverageError : public Error {
public:
    explicit GridCoverageError(const std::string& what) : Error("grid_coverage", what) {}
};

class DampingError : public Error {
public:
    explicit DampingError(const std::string& what) : Error("damping_infeasible", what) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error("fit", what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse", what) {}
};

class HorizonMismatchError : public Error {
public:
    explicit HorizonMismatchError(const std::string& what) : Error("horizon_mismatch", what) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error("invariant", what) {}
};

}  // namespace mlsm

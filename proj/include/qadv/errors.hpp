#pragma once

#include <stdexcept>
#include <string>

namespace qadv {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input to a constructor (bad interval, unsorted nodes, k out of range, ...).
class ConstructionError : public Error {
public:
    using Error::Error;
};

class UnsupportedDegree : public Error {
public:
    explicit UnsupportedDegree(int degree)
        : Error("unsupported Newton-Cotes degree " + std::to_string(degree) + " (supported: 1..8)"),
          degree_(degree) {}
    int degree() const noexcept { return degree_; }

private:
    int degree_;
};

/// A point was requested outside the spline's interval.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to converge.
class InternalError : public Error {
public:
    InternalError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// The integrand returned a non-finite value at a quadrature node.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double node) : Error(what), node_(node) {}
    double node() const noexcept { return node_; }

private:
    double node_;
};

/// Two-sided derivative requested where the one-sided values disagree.
class DiscontinuityError : public Error {
public:
    DiscontinuityError(const std::string& what, double left, double right)
        : Error(what), left_(left), right_(right) {}
    double left() const noexcept { return left_; }
    double right() const noexcept { return right_; }

private:
    double left_;
    double right_;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

}  // namespace qadv

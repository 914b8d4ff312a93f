#pragma once

#include <stdexcept>
#include <string>

namespace fracgrad {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operator.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent caller input.
class InputError : public Error {
public:
    using Error::Error;
};

class AccuracyError : public Error {
public:
    using Error::Error;
};

// Raised when the reconstruction system cannot be solved as configured.
class SolvabilityError : public Error {
public:
    SolvabilityError(const std::string& what, double lambda_min)
        : Error(what), lambda_min_(lambda_min) {}
    double lambda_min() const { return lambda_min_; }

private:
    double lambda_min_;
};

}  // namespace fracgrad

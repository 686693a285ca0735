#pragma once

#include <stdexcept>
#include <string>

namespace dhint {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, malformed configuration, or mismatched sizes.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Nonlinear iteration hit its iteration cap. Fixed-step runs treat this as fatal.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// A state or vector field evaluation produced NaN or Inf.
class BlowUpError : public Error {
public:
    using Error::Error;
};

/// The requested operation needs model structure the model does not have
/// (e.g. a Kahan bilinear form for a cubic vector field).
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

}  // namespace dhint

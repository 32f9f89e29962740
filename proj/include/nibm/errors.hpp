#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nibm {

// Invalid input: atom coincidence, bad measure, out-of-range parameters.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature budget exhausted, eigensolver failure, contour plan failure.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::complex<double> best = {},
                   double estimate = 0.0)
        : std::runtime_error(what), best_(best), estimate_(estimate) {}

    std::complex<double> best_value() const { return best_; }
    double estimate() const { return estimate_; }

private:
    std::complex<double> best_;
    double estimate_;
};

}  // namespace nibm

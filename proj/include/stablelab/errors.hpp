#pragma once

#include <stdexcept>
#include <string>

namespace stablelab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad grid, mismatched arrays, invalid configuration
struct ConfigError : Error {
    using Error::Error;
};

// parameter outside the admissible set (sigma <= 0, lambda <= 1, ...)
struct DomainError : Error {
    using Error::Error;
};

// requested point or frequency not covered by the grid
struct RangeError : Error {
    using Error::Error;
};

// NaN/Inf in data, quadrature that did not converge
struct NumericError : Error {
    using Error::Error;
};

// imaginary residue after an inverse transform
struct SymmetryError : Error {
    using Error::Error;
};

// f carries mass where the reference density is below the floor
struct SupportMismatchError : Error {
    using Error::Error;
};

// every node is masked
struct DegenerateDensityError : Error {
    using Error::Error;
};

// a functional needed by a check is infinite or undefined for this input
struct InapplicableInputError : Error {
    using Error::Error;
};

// an asserted inequality or monotonicity failed beyond its slack
struct VerificationFailure : Error {
    VerificationFailure(std::string category, const std::string& what)
        : Error(what), category(std::move(category)) {}
    std::string category;
};

}  // namespace stablelab

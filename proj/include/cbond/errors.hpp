#pragma once

#include <stdexcept>
#include <string>

namespace cbond {

// Bad inputs: non-PD matrices, disordered dates, negative values, ...
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// MVN dimension above the configured cap.
struct DimensionError : std::length_error {
    using std::length_error::length_error;
};

// Root bracketing or quadrature failed to converge.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tax case II (recovery can exceed principal at maturity) is not modelled.
struct UnsupportedCaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}
}  // namespace detail

}  // namespace cbond

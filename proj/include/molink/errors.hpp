#pragma once

#include <stdexcept>
#include <string>

namespace molink {

// Bad experiment description: unparsable config, invalid key, CFL violation.
// The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model failed its own assumptions (non-unimodal pulse, tap monotonicity
// violation, ...). Mapped to exit code 3.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: divergence, instability, non-convergent iteration.
// Mapped to exit code 3.
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Monte Carlo estimate failed to converge within its trial cap.
struct EstimationError : NumericsError {
    using NumericsError::NumericsError;
};

// An internal contract was violated (negative variance, bad probe window).
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace molink

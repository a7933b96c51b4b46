#pragma once

#include <stdexcept>

namespace permclust {

/// Raised when an argument violates a documented precondition or type invariant.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when a request exceeds a hard resource cap (e.g. enumeration size).
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace permclust

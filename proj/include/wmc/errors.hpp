#pragma once

#include <stdexcept>
#include <string>

namespace wmc {

/// Malformed input: bad routes, mismatched pattern widths, schema errors.
class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The instance admits no feasible plan under the requested construction.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive search refused because the instance exceeds configured limits.
class LimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace wmc

#pragma once

#include <stdexcept>
#include <string>

namespace ubbplan {

/// Input violates a documented precondition or type invariant.
class ValidationError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs are valid but no parameter value achieves the requested target.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond)
        throw ValidationError(what);
}

} // namespace detail

} // namespace ubbplan

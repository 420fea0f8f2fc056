#pragma once

#include <stdexcept>
#include <string>

namespace fieldtrack {

/// Input data violates a documented format or invariant. Maps to exit code 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller misused an API or CLI (missing option, bad argument). Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fieldtrack

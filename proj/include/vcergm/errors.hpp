#pragma once

#include <stdexcept>
#include <string>

namespace vcergm {

/// Malformed or inconsistent input data (bad CSV rows, incompatible specs).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (non-finite design, divergence, too many
/// dropped bootstrap replicates).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller asked for something outside an operation's contract.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace vcergm

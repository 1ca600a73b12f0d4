#pragma once

#include <stdexcept>
#include <string>

namespace swmf {

/// Invalid argument value (probability outside [0,1], parity violation, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Request exceeds an explicit size guard (e.g. exact enumeration limits).
struct CapacityError : std::length_error {
    using std::length_error::length_error;
};

/// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Malformed input data (off-lattice samples and the like).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace swmf
